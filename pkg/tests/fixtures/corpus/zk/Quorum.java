package org.apache.zookeeper;

public class Quorum {
  private static final Logger LOG = LoggerFactory.getLogger(Quorum.class);
  private int größe = 3;

  public boolean hasMajority(int votes) {
    if (votes * 2 <= größe) {
      LOG.warn("keine Mehrheit: " + votes + " – warte");
      return false;
    }
    return true;
  }
}
