package com.github.ambry.clustermap;

import java.util.ArrayList;
import java.util.Collections;
import java.util.List;

public class Simulator {


// placement scenario 1
// placement scenario 2
// placement scenario 3
// placement scenario 4
// placement scenario 5
// placement scenario 6

// placement scenario 8
// placement scenario 9
// placement scenario 10
// placement scenario 11
// placement scenario 12
// placement scenario 13

// placement scenario 15
// placement scenario 16
// placement scenario 17
// placement scenario 18
// placement scenario 19
// placement scenario 20

// placement scenario 22
// placement scenario 23
// placement scenario 24
// placement scenario 25
// placement scenario 26
// placement scenario 27

// placement scenario 29
// placement scenario 30
// placement scenario 31
// placement scenario 32
// placement scenario 33
// placement scenario 34

// placement scenario 36
// placement scenario 37
// placement scenario 38
// placement scenario 39
// placement scenario 40
// placement scenario 41

// placement scenario 43
// placement scenario 44
// placement scenario 45
// placement scenario 46
// placement scenario 47
// placement scenario 48

// placement scenario 50
// placement scenario 51
// placement scenario 52
// placement scenario 53
// placement scenario 54
// placement scenario 55

// placement scenario 57
// placement scenario 58
// placement scenario 59
// placement scenario 60
// placement scenario 61
// placement scenario 62

// placement scenario 64
// placement scenario 65
// placement scenario 66
// placement scenario 67
// placement scenario 68
// placement scenario 69

// placement scenario 71
// placement scenario 72
// placement scenario 73
// placement scenario 74
// placement scenario 75
// placement scenario 76

// placement scenario 78
// placement scenario 79
// placement scenario 80
// placement scenario 81
// placement scenario 82
// placement scenario 83

// placement scenario 85
// placement scenario 86
// placement scenario 87
// placement scenario 88
// placement scenario 89
// placement scenario 90

// placement scenario 92
// placement scenario 93
// placement scenario 94
// placement scenario 95
// placement scenario 96
// placement scenario 97

// placement scenario 99
// placement scenario 100
// placement scenario 101
// placement scenario 102
// placement scenario 103
// placement scenario 104

// placement scenario 106
// placement scenario 107
// placement scenario 108
// placement scenario 109
// placement scenario 110
// placement scenario 111

// placement scenario 113
// placement scenario 114
// placement scenario 115
// placement scenario 116
// placement scenario 117
// placement scenario 118

// placement scenario 120
// placement scenario 121
// placement scenario 122
// placement scenario 123
// placement scenario 124
// placement scenario 125

// placement scenario 127
// placement scenario 128
// placement scenario 129
// placement scenario 130
// placement scenario 131
// placement scenario 132

// placement scenario 134
// placement scenario 135
// placement scenario 136
// placement scenario 137
// placement scenario 138
// placement scenario 139

// placement scenario 141
// placement scenario 142
// placement scenario 143
// placement scenario 144
// placement scenario 145
// placement scenario 146

// placement scenario 148
// placement scenario 149
// placement scenario 150
// placement scenario 151
// placement scenario 152
// placement scenario 153

// placement scenario 155
// placement scenario 156
// placement scenario 157
// placement scenario 158
// placement scenario 159
// placement scenario 160

// placement scenario 162
// placement scenario 163
// placement scenario 164
// placement scenario 165
// placement scenario 166
// placement scenario 167

// placement scenario 169
// placement scenario 170
// placement scenario 171
// placement scenario 172
// placement scenario 173
// placement scenario 174

// placement scenario 176
// placement scenario 177
// placement scenario 178
// placement scenario 179
// placement scenario 180
// placement scenario 181

// placement scenario 183
// placement scenario 184
public static void Strategy3(Datacenter dc, List<Partition> partitions, int numberOfPartitions, int numberOfReplicas,
      long replicaSize) {
    for (int i = 0; i < numberOfPartitions; i++) {
      List<Node> nodes = dc.nodes;
      Collections.shuffle(nodes);
      List<Disk> allocatedDisks = new ArrayList<Disk>();

      for (Node dataNode : nodes) {
        if (allocatedDisks.size() == numberOfReplicas) {
          break;
        }
        Disk disk = dataNode.getDiskWithMostCapacity(replicaSize);
        allocatedDisks.add(disk);
        disk.freeCapacity = disk.freeCapacity - replicaSize;
      }
    }
}

}
