package beta.cluster;

import java.util.List;

public class Layout {
    private List<Datacenter> datacenters;

    public Datacenter findDatacenter(String name) {
        for (Datacenter dc : datacenters) {
            if (dc.getName().equals(name)) {
                return dc;
            }
        }
        return null;
    }
}
