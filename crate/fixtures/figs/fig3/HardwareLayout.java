package com.github.ambry.clustermap;

import java.util.ArrayList;
import java.util.List;

public class HardwareLayout {

  private final List<Datacenter> datacenters = new ArrayList<>();


  // layout note 1
  // layout note 2
  // layout note 3
  // layout note 4
  // layout note 5

  // layout note 7
  // layout note 8
  // layout note 9
  // layout note 10
  // layout note 11

  // layout note 13
  // layout note 14
  // layout note 15
  // layout note 16
  // layout note 17

  // layout note 19
  // layout note 20
  // layout note 21
  // layout note 22
  // layout note 23

  // layout note 25
  // layout note 26
  // layout note 27
  // layout note 28
  // layout note 29

  // layout note 31
  // layout note 32
  // layout note 33
  // layout note 34
  // layout note 35

  // layout note 37
  // layout note 38
  // layout note 39
  // layout note 40
  // layout note 41

  // layout note 43
  // layout note 44
  // layout note 45
  // layout note 46
  // layout note 47

  // layout note 49
  // layout note 50
  // layout note 51
  // layout note 52
  // layout note 53

  // layout note 55
  // layout note 56
  // layout note 57
  // layout note 58
  // layout note 59

  // layout note 61
  // layout note 62
  // layout note 63
  // layout note 64
  // layout note 65

  // layout note 67
  // layout note 68
  // layout note 69
  // layout note 70
  // layout note 71

  // layout note 73
  // layout note 74
  // layout note 75
  // layout note 76
  // layout note 77

  // layout note 79
  // layout note 80
  // layout note 81
  // layout note 82
  // layout note 83

  // layout note 85
  // layout note 86
  // layout note 87
  // layout note 88
  // layout note 89

  // layout note 91
  // layout note 92
  // layout note 93
  // layout note 94
  // layout note 95

  // layout note 97
  // layout note 98
  // layout note 99
  // layout note 100
  // layout note 101

  // layout note 103
  // layout note 104
  // layout note 105
  // layout note 106
  // layout note 107

  // layout note 109
  // layout note 110
  // layout note 111
  // layout note 112
  // layout note 113

  // layout note 115
  // layout note 116
  // layout note 117
  // layout note 118
  // layout note 119

  // layout note 121
  // layout note 122
  // layout note 123
  // layout note 124
  // layout note 125

  // layout note 127
  // layout note 128
  // layout note 129
  // layout note 130
  // layout note 131

  // layout note 133
  // layout note 134
  // layout note 135
  // layout note 136
  // layout note 137

  // layout note 139
  // layout note 140
  // layout note 141
  // layout note 142
  // layout note 143

  // layout note 145
  // layout note 146
  // layout note 147
  // layout note 148
  // layout note 149

  // layout note 151
  // layout note 152
  // layout note 153
  // layout note 154
  // layout note 155

  // layout note 157
  // layout note 158
  // layout note 159
  // layout note 160
  // layout note 161

  // layout note 163
  // layout note 164
  // layout note 165
  // layout note 166
  // layout note 167

  // layout note 169
  // layout note 170
  // layout note 171
  // layout note 172
  // layout note 173

  // layout note 175
  // layout note 176
  // layout note 177
  // layout note 178
  // layout note 179

  // layout note 181
  // layout note 182
  // layout note 183
  // layout note 184
  // layout note 185

  // layout note 187
public Datacenter findDatacenter(String datacenterName) {
    for (Datacenter datacenter : datacenters) {
      if (datacenter.getName().compareToIgnoreCase(datacenterName) == 0) {
        return datacenter;
      }
    }
    return null;
}
}
