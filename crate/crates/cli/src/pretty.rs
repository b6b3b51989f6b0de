use serde_json::Value;

const MAX_ITEMS: usize = 8;

fn cell(v: &Value) -> String {
    match v {
        Value::Array(items) => {
            let shown: Vec<String> = items.iter().take(MAX_ITEMS).map(cell).collect();
            let more = if items.len() > MAX_ITEMS {
                format!(", ... ({} total)", items.len())
            } else {
                String::new()
            };
            format!("[{}{more}]", shown.join(", "))
        }
        Value::Object(_) => "{..}".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn rows(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                rows(&key, inner, out);
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

/// Two-column key/value table; nested objects get dotted keys.
pub fn table(v: &Value) -> String {
    let mut out = Vec::new();
    rows("", v, &mut out);
    let width = out.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    out.iter().map(|(k, val)| format!("{k:<width$}  {val}\n")).collect()
}
