#![no_main]

use hokdv::config::Resolved;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for (_, schema) in hokdv::schemas() {
        if let Ok(r) = Resolved::resolve(schema, Some(text), &[]) {
            // the hash must not depend on how the file was written
            let flags: Vec<(String, String)> = r.values.iter().map(|(k, v)| (k.clone(), flag_text(v))).collect();
            let again = Resolved::resolve(schema, None, &flags).expect("resolved values re-parse as flags");
            assert_eq!(r.hash(), again.hash());
        }
    }
});

fn flag_text(v: &hokdv::config::Value) -> String {
    use hokdv::config::Value;
    match v {
        Value::Str(s) => s.clone(),
        Value::IntList(l) => l.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
        Value::Pair(a, b) => format!("{a:?},{b:?}"),
        other => other.to_string(),
    }
}
