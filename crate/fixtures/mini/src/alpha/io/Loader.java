package alpha.io;

import java.io.FileInputStream;
import java.io.IOException;

public class Loader {
    public int firstByte(String path) throws IOException {
        FileInputStream in = new FileInputStream(path);
        int b = in.read();
        return b;
    }
}
