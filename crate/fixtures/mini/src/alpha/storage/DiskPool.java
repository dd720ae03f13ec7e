package alpha.storage;

import java.util.List;

public class DiskPool {
    private final List<Disk> disks;

    public DiskPool(List<Disk> disks) {
        this.disks = disks;
    }

    public Disk pickDisk(long needed) {
        for (Disk d : disks) {
            if (d.getFreeSpace() >= needed) {
                return d;
            }
        }
        return null;
    }
}
