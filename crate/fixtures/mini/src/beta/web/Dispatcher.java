package beta.web;

import java.lang.reflect.Method;

public class Dispatcher {
    private final Method handlerMethod;

    public Dispatcher(Method handlerMethod) {
        this.handlerMethod = handlerMethod;
    }

    protected Method getHandlerMethod() {
        return this.handlerMethod;
    }

    public String describe() {
        Method handler = getHandlerMethod();
        String name = handler.getName();
        return "handler " + name;
    }
}
