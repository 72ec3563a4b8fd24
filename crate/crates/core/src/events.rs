//! Structured logging: every event is one JSON object on a single line.
//!
//! Events go to stderr by default. Tests can install a capture sink with
//! [`capture`] to assert on skip counts and fallback rates.

use std::cell::RefCell;
use std::io::Write;

use serde_json::{Map, Value};

thread_local! {
    static SINK: RefCell<Option<Vec<Value>>> = const { RefCell::new(None) };
}

/// Emit an event with the given name and fields.
pub fn emit(event: &str, fields: Value) {
    let mut obj = Map::new();
    obj.insert("event".to_owned(), Value::String(event.to_owned()));
    if let Value::Object(extra) = fields {
        obj.extend(extra);
    }
    let value = Value::Object(obj);
    let captured = SINK.with(|sink| {
        if let Some(events) = sink.borrow_mut().as_mut() {
            events.push(value.clone());
            true
        } else {
            false
        }
    });
    if !captured {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{value}");
    }
}

/// Run `f` with events captured on the current thread instead of printed.
pub fn capture<T>(f: impl FnOnce() -> T) -> (T, Vec<Value>) {
    let previous = SINK.with(|sink| sink.borrow_mut().replace(Vec::new()));
    let out = f();
    let events = SINK.with(|sink| {
        let mut sink = sink.borrow_mut();
        let events = sink.take().unwrap_or_default();
        *sink = previous;
        events
    });
    (out, events)
}
