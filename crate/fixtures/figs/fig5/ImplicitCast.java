import java.util.HashMap;

public class ImplicitCast {

    public static void main(String[] args) {
        HashMap<String, Double> m = new HashMap<String, Double>();
        m.put("Bla", new Double(1.0));
        //below line will cause an implicit cast operation
        double v = m.get("Bla");
        System.out.println(v);
    }
}
