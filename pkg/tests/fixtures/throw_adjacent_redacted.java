public class YarnChecks {
  public void check(Throwable t, String errMsg) {
    if (t != null) {
      ;
      throw new YarnException(errMsg, t);
    } else {
      ;
      throw new YarnException(errMsg);
    }
  }
}
