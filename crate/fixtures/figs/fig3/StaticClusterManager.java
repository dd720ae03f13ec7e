package com.github.ambry.clustermap;

import java.util.List;

public class StaticClusterManager {

  private final HardwareLayout hardwareLayout;
  private final PartitionLayout partitionLayout;

  public void addNewPartition(PartitionId partitionId, String dataCenterName, int numberOfReplicasPerDatacenter,
      long capacityOfReplicasInBytes, boolean attemptNonRackAwareOnFailure) {

    // step 1
    // step 2
    // step 3
    // step 4

    // step 6
    // step 7
    // step 8
    // step 9

    // step 11
    // step 12
    // step 13
    // step 14

    // step 16
    // step 17
    // step 18
    // step 19

    // step 21
    // step 22
    // step 23
    // step 24

    // step 26
    // step 27
    // step 28
    // step 29

    // step 31
    // step 32
    // step 33
    // step 34

    // step 36
    // step 37
    // step 38
    // step 39

    // step 41
    // step 42
    // step 43
    // step 44

    // step 46
    // step 47
    // step 48
    // step 49

    // step 51
    // step 52
    // step 53
    // step 54

    // step 56
    // step 57
    // step 58
    // step 59

    // step 61
    // step 62
    // step 63
    // step 64

    // step 66
    // step 67
    // step 68
    // step 69

    // step 71
    // step 72
    // step 73
    // step 74

    // step 76
    // step 77
    // step 78
    // step 79

    // step 81
    // step 82
    // step 83
    // step 84

    // step 86
    // step 87
    // step 88
    // step 89

    // step 91
    // step 92
    // step 93
    // step 94

    // step 96
    // step 97
    // step 98
    // step 99

    // step 101
    // step 102
    // step 103
    // step 104

    // step 106
    // step 107
    // step 108
    // step 109

    // step 111
    // step 112
    // step 113
    // step 114

    // step 116
    // step 117
    // step 118
    // step 119

    // step 121
    // step 122
    // step 123
    // step 124

    // step 126
    // step 127
    // step 128
    // step 129

    // step 131
    // step 132
    // step 133
    // step 134

    // step 136
    // step 137
    // step 138
    // step 139

    // step 141
    // step 142
    // step 143
    // step 144

    // step 146
    // step 147
    // step 148
    // step 149

    // step 151
    // step 152
    // step 153
    // step 154

    // step 156
    // step 157
    // step 158
    // step 159

    // step 161
    // step 162
    // step 163
    // step 164

    // step 166
    // step 167
    // step 168
    // step 169

    // step 171
    // step 172
    // step 173
    // step 174

    // step 176
    // step 177
    // step 178
    // step 179

    // step 181
    // step 182
    // step 183
    // step 184

    // step 186
    // step 187
    // step 188
    // step 189

    // step 191
    // step 192
    // step 193
    // step 194

    // step 196
    // step 197
    // step 198
    // step 199

    // step 201
    // step 202
    // step 203
    // step 204

    // step 206
    // step 207
    // step 208
    // step 209

    // step 211
    // step 212
    // step 213
    // step 214

    // step 216
    // step 217
    // step 218
    // step 219

    // step 221
    // step 222
    // step 223
    // step 224

    // step 226
    // step 227
    // step 228
    // step 229

    // step 231
    // step 232
    // step 233
    // step 234

    // step 236
    // step 237
    // step 238
    // step 239

    // step 241
    // step 242
    // step 243
    // step 244

    // step 246
    // step 247
    // step 248
    // step 249

    // step 251
    // step 252
    // step 253
    // step 254

    // step 256
    // step 257
    // step 258
    // step 259

    // step 261
    // step 262
    // step 263
    // step 264

    // step 266
    // step 267
    // step 268
    // step 269

    // step 271
    // step 272
    // step 273
    // step 274

    // step 276
    // step 277
    // step 278
    // step 279

    // step 281
    // step 282
    // step 283
    // step 284

    // step 286
    // step 287
    // step 288
    // step 289

    // step 291
    // step 292
    // step 293
    // step 294

    // step 296
    // step 297
    // step 298
    // step 299

    // step 301
    // step 302
    // step 303
    // step 304

    // step 306
    // step 307
    // step 308
    // step 309

    // step 311
    // step 312
    // step 313
    // step 314

    // step 316
    // step 317
    // step 318
    // step 319

    // step 321
    // step 322
    // step 323
    // step 324

    // step 326
    // step 327
    // step 328
    // step 329

    // step 331
    // step 332
    // step 333
    // step 334

    // step 336
    // step 337
    // step 338
    // step 339

    // step 341
    // step 342
    // step 343
    // step 344

    // step 346
    // step 347
    // step 348
    // step 349

    // step 351
    // step 352
    // step 353
    // step 354

    // step 356
    // step 357
    // step 358
    // step 359

    // step 361
    // step 362
    // step 363
    // step 364

    // step 366
    // step 367
    // step 368
    // step 369

    // step 371
    // step 372
    // step 373
    // step 374

    // step 376
    // step 377
    // step 378
    // step 379

    // step 381
    // step 382
    // step 383
    // step 384

    // step 386
    // step 387
    // step 388
    // step 389

    // step 391
    // step 392
    // step 393
    // step 394

    // step 396
    // step 397
    // step 398
    // step 399

    // step 401
    // step 402
    // step 403
    // step 404

    // step 406
    // step 407
    // step 408
    // step 409

    // step 411
    // step 412
    // step 413
    // step 414

    // step 416
    // step 417
    // step 418
    // step 419

    // step 421
    // step 422
    // step 423
    // step 424

    // step 426
    // step 427
    // step 428
    // step 429

    // step 431
    // step 432
    // step 433
    // step 434

    // step 436
    // step 437
    // step 438
    // step 439

    // step 441
    // step 442
    // step 443
    // step 444

    // step 446
    // step 447
    // step 448
    Datacenter datacenterToAdd = hardwareLayout.findDatacenter(dataCenterName);
    List<Disk> disksForReplicas =
        allocateDisksForPartition(numberOfReplicasPerDatacenter, capacityOfReplicasInBytes, datacenterToAdd,
            attemptNonRackAwareOnFailure);
    partitionLayout.addNewReplicas((Partition) partitionId, disksForReplicas);
    System.out.println("Added partition " + partitionId + " to datacenter " + dataCenterName);
  }
}
