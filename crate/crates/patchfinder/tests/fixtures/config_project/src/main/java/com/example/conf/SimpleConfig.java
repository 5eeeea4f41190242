package com.example.conf;

import java.util.LinkedHashMap;
import java.util.Map;
import java.util.Set;

/** Flat key/value configuration with insertion-ordered keys. */
public final class SimpleConfig {

    private final Map<String, String> values = new LinkedHashMap<>();

    public void put(String key, String value) {
        if (key == null || key.isEmpty()) {
            throw new IllegalArgumentException("empty key");
        }
        values.put(key, value);
    }

    public String get(String key) {
        String value = values.get(key);
        if (value == null) {
            throw new IllegalStateException("missing key: " + key);
        }
        return value;
    }

    public boolean has(String key) {
        return values.containsKey(key);
    }

    public Set<String> keys() {
        return values.keySet();
    }

    public int size() {
        return values.size();
    }

    public SimpleConfig withFallback(SimpleConfig other) {
        SimpleConfig merged = new SimpleConfig();
        for (String key : other.keys()) {
            merged.put(key, other.get(key));
        }
        for (String key : keys()) {
            merged.put(key, get(key));
        }
        return merged;
    }
}
