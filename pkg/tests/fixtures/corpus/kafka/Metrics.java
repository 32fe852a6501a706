package org.apache.kafka;

public class Metrics {
  private static final Logger LOG = LoggerFactory.getLogger(Metrics.class);
  private final Auditor audit = new Auditor();

  public void record(String name, double value) {
    if (LOG.isDebugEnabled()) {
      System.out.println(name + "=" + value);
    }
    audit.info("metric " + name);
    LOG.log(Level.INFO, "metric recorded");
  }
}
