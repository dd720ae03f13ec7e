package beta.conf;

import java.util.Map;

public class Settings {
    private Map<String, String> values;

    Map<String, String> config() {
        return values;
    }

    public String key() {
        String name = config().get("k").trim();
        return name.toUpperCase();
    }
}
