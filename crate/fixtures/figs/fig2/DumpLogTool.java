package com.github.ambry.store;

import java.io.File;
import java.io.IOException;
import java.util.ArrayList;
import java.util.HashMap;
import java.util.Map;

/**
 * Dumps the contents of a log segment and reports blobs whose
 * put and delete records disagree.
 */
public class DumpLogTool {

  private final StoreToolsMetrics metrics;
  private final Logger logger;


  // tool option 1
  // tool option 2
  // tool option 3

  // tool option 5
  // tool option 6
  // tool option 7

  // tool option 9
  // tool option 10
  // tool option 11

  // tool option 13
  // tool option 14
  // tool option 15

  // tool option 17
  // tool option 18
  // tool option 19

  // tool option 21
  // tool option 22
  // tool option 23

  // tool option 25
  // tool option 26
  // tool option 27

  // tool option 29
  // tool option 30
  // tool option 31

  // tool option 33
  // tool option 34
  // tool option 35

  // tool option 37
  // tool option 38
  // tool option 39

  // tool option 41
  // tool option 42
  // tool option 43

  // tool option 45
  // tool option 46
  // tool option 47

  // tool option 49
  // tool option 50
  // tool option 51

  // tool option 53
  // tool option 54
  // tool option 55

  // tool option 57
  // tool option 58
  // tool option 59

  // tool option 61
  // tool option 62
  // tool option 63

  // tool option 65
  // tool option 66
  // tool option 67

  // tool option 69
  // tool option 70
  // tool option 71

  // tool option 73
  // tool option 74
  // tool option 75

  // tool option 77
  // tool option 78
  // tool option 79

  // tool option 81
  // tool option 82
  // tool option 83

  // tool option 85
  // tool option 86
  // tool option 87

  // tool option 89
  // tool option 90
  // tool option 91

  // tool option 93
  // tool option 94
  // tool option 95

  // tool option 97
  // tool option 98
  // tool option 99

  // tool option 101
  // tool option 102
  // tool option 103

  // tool option 105
  // tool option 106
  // tool option 107

  // tool option 109
  // tool option 110
  // tool option 111

  // tool option 113
  // tool option 114
  // tool option 115

  // tool option 117
private void dumpLog(File logFile, long startOffset, long endOffset, ArrayList<String> blobs) throws IOException {
    Map<String, LogBlobStatus> blobIdToLogRecord = new HashMap<>();
    final Timer.Context context = metrics.dumpLogTimeMs.time();
    try {
      dumpLog(logFile, startOffset, endOffset, blobs, blobIdToLogRecord);
      long totalInConsistentBlobs = 0;
      for (String blobId : blobIdToLogRecord.keySet()) {
        LogBlobStatus logBlobStatus = blobIdToLogRecord.get(blobId);
        if (!logBlobStatus.isConsistent) {
          totalInConsistentBlobs++;
          logger.error("Inconsistent blob " + blobId + " " + logBlobStatus);
        }
      }
      logger.info("Total inconsistent blobs " + totalInConsistentBlobs);
    } finally {
      context.stop();
    }
}

}
