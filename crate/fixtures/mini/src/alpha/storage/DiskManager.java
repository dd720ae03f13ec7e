package alpha.storage;

public class DiskManager {
    private final DiskPool pool;

    public DiskManager(DiskPool pool) {
        this.pool = pool;
    }

    public long reserve(long bytes) {
        long requested = bytes + 4096;
        Disk disk = pool.pickDisk(requested);
        long free = disk.getFreeSpace();
        return free - requested;
    }
}
