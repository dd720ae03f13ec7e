package beta.cluster;

public class Topology {
    private final Layout layout;

    public Topology(Layout layout) {
        this.layout = layout;
    }

    public int addPartition(String datacenterName) {
        Datacenter datacenterToAdd = layout.findDatacenter(datacenterName);
        int id = datacenterToAdd.getId();
        return id + 1;
    }
}
