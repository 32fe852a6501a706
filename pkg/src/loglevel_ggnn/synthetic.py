"""Synthetic Java corpus whose log levels follow fixed code motifs.

Each generated file holds one class with one method containing exactly one
log statement.  The level is decided by the surrounding code:

    trace  inside a counting loop
    debug  guarded by ``isDebugEnabled()``
    info   plain statement in the method body
    warn   inside a ``catch`` block that recovers
    error  directly followed by ``throw``
    fatal  directly followed by ``System.exit``

Identifiers, messages and filler statements are drawn at random so that
only the motif carries the label.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .logs import LEVEL_NAMES, LabeledSample, LogLevel, extract_source

_NOUNS = ["cache", "buffer", "request", "session", "record", "token", "queue", "block", "node",
          "segment", "region", "lease", "job", "task", "stream", "split", "offset", "replica"]
_VERBS = ["load", "flush", "update", "resolve", "commit", "refresh", "scan", "merge", "open",
          "close", "fetch", "allocate", "release", "register", "compact", "verify"]
_CLASS_SUFFIX = ["Manager", "Service", "Handler", "Store", "Tracker", "Monitor", "Writer", "Reader"]
_EXCEPTIONS = ["IOException", "IllegalStateException", "RuntimeException", "TimeoutException",
               "InterruptedException", "IllegalArgumentException"]
_LOGGERS = ["LOG", "log", "LOGGER", "logger"]
_MESSAGES = ["state changed", "operation finished", "value is", "unable to continue",
             "retrying later", "starting work", "entry count", "lookup result"]


def _camel(*words: str) -> str:
    return words[0] + "".join(w.capitalize() for w in words[1:])


class _Names:
    def __init__(self, rng: np.random.Generator):
        pick = lambda xs: xs[int(rng.integers(len(xs)))]
        noun, noun2 = rng.choice(_NOUNS, size=2, replace=False)
        verb, verb2 = rng.choice(_VERBS, size=2, replace=False)
        self.cls = noun.capitalize() + pick(_CLASS_SUFFIX)
        self.log = pick(_LOGGERS)
        self.field = _camel(str(noun), "count")
        self.arg = _camel(str(noun2), "id")
        self.local = _camel(str(noun2), "value")
        self.method = _camel(str(verb), str(noun))
        self.helper = _camel(str(verb2), str(noun2))
        self.exc = pick(_EXCEPTIONS)
        self.msg = pick(_MESSAGES)
        self.pkg = "org.example." + str(noun)


def _filler(n: _Names, rng: np.random.Generator) -> list[str]:
    options = [
        f"long {n.local} = {n.helper}({n.arg});",
        f"{n.field} = {n.field} + 1;",
        f"String {n.local}Text = String.valueOf({n.arg});",
        f"{n.helper}({n.arg});",
        f"int {n.local}Size = {n.arg}.length();",
    ]
    k = int(rng.integers(0, 3))
    idx = rng.choice(len(options), size=k, replace=False)
    return [options[i] for i in sorted(idx)]


def _motif(level: LogLevel, n: _Names, rng: np.random.Generator) -> list[str]:
    call = lambda lvl, extra="": f'{n.log}.{lvl}("{n.msg}"{extra});'
    if level is LogLevel.TRACE:  # per-iteration detail inside a loop
        return [f"for (int i = 0; i < {n.arg}.length(); i++) {{", "  " + call("trace", " + i"), "}"]
    if level is LogLevel.DEBUG:
        return [f"if ({n.log}.isDebugEnabled()) {{", "  " + call("debug", f" + {n.arg}"), "}"]
    if level is LogLevel.INFO:
        return [f"{n.field} = {n.helper}({n.arg});", call("info", f" + {n.field}")]
    if level is LogLevel.WARN:
        return ["try {", f"  {n.helper}({n.arg});", f"}} catch ({n.exc} e) {{",
                "  " + call("warn", ", e"), f"  {n.field} = 0;", "}"]
    if level is LogLevel.ERROR:
        if rng.random() < 0.5:
            return [f"if ({n.arg} == null) {{", "  " + call("error"),
                    f'  throw new {n.exc}("{n.msg}");', "}"]
        return ["try {", f"  {n.helper}({n.arg});", f"}} catch ({n.exc} e) {{",
                "  " + call("error", ", e"), "  throw new RuntimeException(e);", "}"]
    return [f"if ({n.field} < 0) {{", "  " + call("fatal"), "  System.exit(1);", "}"]


def generate_source(level, seed) -> str:
    """One Java file whose single log statement has the given level."""
    level = LogLevel.parse(level)
    rng = np.random.default_rng(seed)
    n = _Names(rng)
    returns = rng.random() < 0.5
    body = _filler(n, rng) + _motif(level, n, rng)
    if rng.random() < 0.5:
        body += _filler(n, rng)
    if returns:
        body.append(f"return {n.field};")
    ret = "long" if returns else "void"
    lines = [
        f"package {n.pkg};",
        "",
        f"public class {n.cls} {{",
        f"  private static final Logger {n.log} = LoggerFactory.getLogger({n.cls}.class);",
        f"  private long {n.field};",
        "",
        f"  public {ret} {n.method}(String {n.arg}) {{",
        *("    " + line for line in body),
        "  }",
        "",
        f"  private long {n.helper}(String {n.arg}) {{",
        f"    return {n.arg}.hashCode();",
        "  }",
        "}",
        "",
    ]
    return "\n".join(lines)


def generate_corpus(n_per_level: int, seed: int = 0, projects=("alpha", "beta")) -> dict[str, str]:
    """Relative path -> source for ``n_per_level`` files of each level, spread over projects."""
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(n_per_level * len(LogLevel))
    files = {}
    k = 0
    for level in LogLevel:
        for i in range(n_per_level):
            project = projects[k % len(projects)]
            files[f"{project}/{level.label}_{i:04d}.java"] = generate_source(level, children[k])
            k += 1
    return dict(sorted(files.items()))


def write_corpus(root, n_per_level: int, seed: int = 0, projects=("alpha", "beta")) -> list[Path]:
    root = Path(root)
    paths = []
    for rel, text in generate_corpus(n_per_level, seed, projects).items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths


def generate_samples(n_per_level: int, seed: int = 0, projects=("alpha", "beta"),
                     max_hops: int = 8) -> list[LabeledSample]:
    """Labeled samples extracted from a freshly generated corpus."""
    samples = []
    for rel, text in generate_corpus(n_per_level, seed, projects).items():
        project = rel.split("/", 1)[0]
        samples.extend(extract_source(text, rel, project, max_hops=max_hops))
    return samples


def balanced_labels(n: int, seed: Optional[int] = None) -> np.ndarray:
    """``n`` level ordinals with every level equally represented (n divisible by 6)."""
    k = len(LEVEL_NAMES)
    if n % k:
        raise ValueError(f"n must be a multiple of {k}")
    labels = np.repeat(np.arange(k), n // k)
    if seed is not None:
        labels = np.random.default_rng(seed).permutation(labels)
    return labels
