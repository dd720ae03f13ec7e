package alpha.util;

import java.util.HashMap;
import java.util.Map;

public class Registry {
    private final Map<String, String> entries = new HashMap<>();

    public int totalLength() {
        int total = 0;
        for (String key : entries.keySet()) {
            String value = entries.get(key);
            total += value.length();
        }
        return total;
    }
}
