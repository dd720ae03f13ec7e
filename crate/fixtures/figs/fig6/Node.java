package com.github.ambry.clustermap;

import java.util.List;

public class Node {

private final List<Disk> disks;

public Disk getDiskWithMostCapacity(long replicaSize) {
    Disk minDisk = null;
    for (Disk disk : disks) {
      if ((minDisk == null || minDisk.freeCapacity < disk.freeCapacity) && disk.freeCapacity >= replicaSize) {
        minDisk = disk;
      }
    }
    return minDisk;
}

}
