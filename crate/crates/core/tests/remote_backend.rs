//! The HTTP client against a throwaway in-process server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};
use slotqa::backend::RemoteBackend;
use slotqa::question::AblationMode;
use slotqa::{bundled, BackendConfig, BackendError, SlotFiller, SpanExtractor};

type Handler = dyn Fn(usize, &str, &str, &Value) -> (u16, Value) + Send + Sync;

struct Mock {
    url: String,
    hits: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
}

fn read_request(stream: &mut impl Read) -> Option<(String, String, Value)> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let mut parts = line.split_whitespace();
    let method = parts.next()?.to_string();
    let path = parts.next()?.to_string();
    let mut len = 0;
    let mut chunked = false;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).ok()?;
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        let (k, v) = h.split_once(':')?;
        match k.trim().to_ascii_lowercase().as_str() {
            "content-length" => len = v.trim().parse().ok()?,
            "transfer-encoding" => chunked = v.trim().eq_ignore_ascii_case("chunked"),
            _ => {}
        }
    }
    let mut body = Vec::new();
    if chunked {
        loop {
            let mut size = String::new();
            reader.read_line(&mut size).ok()?;
            let n = usize::from_str_radix(size.trim(), 16).ok()?;
            let mut buf = vec![0; n + 2];
            reader.read_exact(&mut buf).ok()?;
            if n == 0 {
                break;
            }
            body.extend_from_slice(&buf[..n]);
        }
    } else {
        body.resize(len, 0);
        reader.read_exact(&mut body).ok()?;
    }
    let value = if body.is_empty() { Value::Null } else { serde_json::from_slice(&body).ok()? };
    Some((method, path, value))
}

fn serve(handler: impl Fn(usize, &str, &str, &Value) -> (u16, Value) + Send + Sync + 'static) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let handler: Arc<Handler> = Arc::new(handler);
    let (h, b) = (hits.clone(), bodies.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let Some((method, path, body)) = read_request(&mut stream) else { continue };
            let n = h.fetch_add(1, Ordering::SeqCst);
            b.lock().unwrap().push(body.clone());
            let (status, reply) = handler(n, &method, &path, &body);
            let payload = reply.to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    Mock { url, hits, bodies }
}

fn cfg(url: &str, batch: usize) -> BackendConfig {
    BackendConfig {
        endpoint: Some(url.to_string()),
        batch_size: batch,
        timeout_ms: 5_000,
        retries: 2,
        ..BackendConfig::default()
    }
}

/// Answers every question with the last word of its context, returning the
/// items in reverse order.
fn last_word(_: usize, _: &str, _: &str, body: &Value) -> (u16, Value) {
    let mut items: Vec<Value> = body["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|it| {
            let ctx = it["context"].as_str().unwrap();
            let word = ctx.split(' ').next_back().unwrap();
            let start = ctx.chars().count() - word.chars().count();
            json!({"id": it["id"], "text": word, "answer_start": start, "span_score": 0.9, "no_answer_score": 0.1})
        })
        .collect();
    items.reverse();
    (200, json!({ "items": items }))
}

#[test]
fn batches_keep_input_order() {
    let mock = serve(last_word);
    let c = cfg(&mock.url, 2);
    let backend = RemoteBackend::new(&c).unwrap();
    assert_eq!(backend.endpoint(), mock.url.trim_end_matches('/'));
    let contexts = ["fly to Zürich", "one two", "", "a b c", "x", "to Boston"];
    let pairs: Vec<(&str, &str)> = contexts.iter().map(|c| ("where?", *c)).collect();
    let out = backend.batch_extract(&pairs, &c);
    assert_eq!(out.len(), 6);
    let texts: Vec<Option<String>> = out
        .iter()
        .map(|r| r.as_ref().ok().and_then(|r| r.answer.as_ref()).map(|a| a.text.clone()))
        .collect();
    assert_eq!(
        texts,
        [Some("Zürich".into()), Some("two".into()), None, Some("c".into()), Some("x".into()), Some("Boston".into())]
    );
    assert_eq!(out[2], Err(BackendError::EmptyContext));
    assert_eq!(out[0].as_ref().unwrap().answer.as_ref().unwrap().start_char, 7);
    // Three chunks of two, with the empty context held back.
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
    let bodies = mock.bodies.lock().unwrap();
    assert_eq!(bodies[1]["items"].as_array().unwrap().len(), 1);
    assert_eq!(bodies[1]["items"][0]["id"], "3");
}

#[test]
fn bad_items_do_not_spoil_the_batch() {
    let mock = serve(|_, _, _, body| {
        let items: Vec<Value> = body["items"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|it| it["id"] != "2")
            .map(|it| match it["id"].as_str().unwrap() {
                "0" => json!({"id": "0", "text": "Denver", "answer_start": 0, "span_score": 0.9, "no_answer_score": 0.0}),
                "1" => json!({"id": "1", "text": null, "answer_start": null, "span_score": 0.0, "no_answer_score": 0.9}),
                id => json!({"id": id, "text": "to", "answer_start": 0, "span_score": 0.9, "no_answer_score": 0.0}),
            })
            .collect();
        (200, json!({ "items": items }))
    });
    let c = cfg(&mock.url, 8);
    let backend = RemoteBackend::new(&c).unwrap();
    let out = backend.batch_extract(&[("q0", "to Boston"), ("q1", "to Boston"), ("q2", "to Boston"), ("q3", "to Boston")], &c);
    assert!(matches!(&out[0], Err(BackendError::ContractViolation { item, .. }) if item == "q0"));
    assert!(out[1].as_ref().unwrap().answer.is_none());
    assert!(matches!(&out[2], Err(BackendError::ContractViolation { reason, .. }) if reason.contains("no result")));
    assert_eq!(out[3].as_ref().unwrap().answer.as_ref().unwrap().text, "to");
}

#[test]
fn server_errors_are_retried() {
    let mock = serve(|n, m, p, b| if n == 0 { (503, json!({})) } else { last_word(n, m, p, b) });
    let c = cfg(&mock.url, 4);
    let out = RemoteBackend::new(&c).unwrap().extract("q", "to Boston", &c).unwrap();
    assert_eq!(out.answer.unwrap().text, "Boston");
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn persistent_failures_reach_every_item() {
    let mock = serve(|_, _, _, _| (500, json!({"error": "boom"})));
    let c = cfg(&mock.url, 4);
    let out = RemoteBackend::new(&c).unwrap().batch_extract(&[("a", "x y"), ("b", "y z")], &c);
    assert!(out.iter().all(|r| matches!(r, Err(BackendError::Unavailable(_)))));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);

    // Client errors and garbage are not worth retrying.
    let mock = serve(|_, _, _, _| (404, json!({})));
    let err = RemoteBackend::new(&c.clone().tap(&mock.url)).unwrap().extract("a", "x", &c).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable(m) if m.contains("404")));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
    let mock = serve(|_, _, _, _| (200, json!({"nope": 1})));
    let err = RemoteBackend::new(&c.clone().tap(&mock.url)).unwrap().extract("a", "x", &c).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable(_)));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

trait Tap {
    fn tap(self, url: &str) -> Self;
}

impl Tap for BackendConfig {
    fn tap(mut self, url: &str) -> Self {
        self.endpoint = Some(url.to_string());
        self
    }
}

#[test]
fn unreachable_server() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let c = BackendConfig { retries: 0, ..cfg(&format!("http://127.0.0.1:{port}"), 4) };
    let err = RemoteBackend::new(&c).unwrap().extract("a", "x", &c).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable(_)));
}

#[test]
fn health_check() {
    let mock = serve(|_, m, p, _| {
        assert_eq!((m, p), ("GET", "/health"));
        (200, json!({"status": "ok", "model": "squad2-base"}))
    });
    let h = RemoteBackend::new(&cfg(&mock.url, 1)).unwrap().health().unwrap();
    assert!(h.is_ok());
    assert_eq!(h.model.as_deref(), Some("squad2-base"));
}

#[test]
fn dispatch_through_the_wire() {
    // A toy model: radio questions get the matching choice, everything else
    // is declined.
    let mock = serve(|_, _, path, body| {
        assert_eq!(path, "/extract");
        let items: Vec<Value> = body["items"]
            .as_array()
            .unwrap()
            .iter()
            .map(|it| {
                let q = it["question"].as_str().unwrap();
                let ctx = it["context"].as_str().unwrap();
                let hit = q
                    .strip_prefix("Is this ")
                    .and_then(|rest| rest.trim_end_matches('?').split([',', ' ']).find(|w| !w.is_empty() && w != &"or" && ctx.contains(*w)))
                    .map(|w| (w, ctx.find(w).unwrap()));
                match hit {
                    Some((w, byte)) => json!({"id": it["id"], "text": w, "answer_start": ctx[..byte].chars().count(),
                                              "span_score": 0.8, "no_answer_score": 0.2}),
                    None => json!({"id": it["id"], "text": null, "answer_start": null, "span_score": 0.0, "no_answer_score": 0.95}),
                }
            })
            .collect();
        (200, json!({ "items": items }))
    });
    let c = cfg(&mock.url, 4);
    let backend = RemoteBackend::new(&c).unwrap();
    let filler = SlotFiller::new(&backend, c);
    let r = filler
        .fill_slots(&[bundled::vehicle_logger()], "please log this trip as Personal", AblationMode::Full)
        .unwrap();
    assert_eq!(r.fills.len(), 1);
    assert_eq!(r.fills["trip_type"].surface, "Personal");
    assert_eq!((r.fills["trip_type"].token_start, r.fills["trip_type"].token_end), (5, 6));
    assert_eq!(r.rejections.len(), 9);
    assert!(r.rejections.values().all(|&s| s == 0.95));
    // Ten questions in chunks of four.
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
}
