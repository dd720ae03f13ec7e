package com.azure.spring.messaging;

import org.springframework.lang.Nullable;
import org.springframework.messaging.handler.invocation.InvocableHandlerMethod;












public class DefaultAzureMessageHandler implements AzureMessageHandler {

    @Nullable
    private InvocableHandlerMethod handlerMethod;

    private Class<?> messagePayloadType;

    private String createMessagingErrorMessage(String description) {
        InvocableHandlerMethod handlerMethod = getHandlerMethod();
        StringBuilder sb =
                new StringBuilder(description).append("\n").append("Endpoint handler details:\n").append("Method [")
                                                .append(handlerMethod.getMethod()).append("]\n").append("Bean [")
                                                .append(handlerMethod.getBean()).append("]\n");
        return sb.toString();
    }

    public Class<?> getMessagePayloadType() {
        return messagePayloadType;
    }

    public void setMessagePayloadType(Class<?> messagePayloadType) {
        this.messagePayloadType = messagePayloadType;
    }


    // handler note 1
    // handler note 2
    // handler note 3

    // handler note 5
    // handler note 6
    // handler note 7

    // handler note 9
    // handler note 10
    // handler note 11

    // handler note 13
    // handler note 14
public InvocableHandlerMethod getHandlerMethod() {
    return handlerMethod;
}
}
