mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Duration;

use common::*;
use plainsql::translator::TranslateRequest;
use plainsql::{Engine, EngineConfig, RemoteTranslator, ServiceError};

/// Serves `count` translation requests with a fixed SQL answer and hands
/// each parsed request back to the test.
fn stub_server(sql: &'static str, count: usize) -> (String, mpsc::Receiver<TranslateRequest>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for stream in listener.incoming().take(count) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some((name, value)) = line.split_once(':') {
                    if name.eq_ignore_ascii_case("content-length") {
                        length = value.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            tx.send(serde_json::from_slice(&body).unwrap()).unwrap();
            let reply = serde_json::json!({ "sql": sql }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                reply.len(),
                reply
            )
            .unwrap();
        }
    });
    (format!("http://{addr}"), rx)
}

#[test]
fn remote_backend_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (url, requests) = stub_server(MARY_SQL, 1);
    let engine = Engine::open(EngineConfig::new(dir.path().join("data")), Arc::new(RemoteTranslator::new(&url))).unwrap();
    let db = engine.onboard(&plainsql::Source::detect(fixture_source(dir.path())).unwrap(), &Default::default()).unwrap();

    let r = engine.query(&db.id, MARY_Q, None).unwrap();
    assert_eq!(r.sql, MARY_RESOLVED);
    assert_eq!(r.backend_id, "remote");

    let sent = requests.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(sent.query, MARY_Q);
    let customer = sent.schema.tables.iter().find(|t| t.name == "customer").unwrap();
    assert!(customer.columns.iter().any(|c| c.name == "first_name"));

    // Served from the cache: the stub only answers once.
    assert!(engine.query(&db.id, MARY_Q, None).unwrap().from_cache);
}

#[test]
fn unreachable_backend_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    // Bind then drop to get a port nobody listens on.
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let translator = RemoteTranslator::with_timeout(&format!("http://127.0.0.1:{port}"), Duration::from_secs(2));
    let engine = Engine::open(EngineConfig::new(dir.path().join("data")), Arc::new(translator)).unwrap();
    let db = engine.onboard(&plainsql::Source::detect(fixture_source(dir.path())).unwrap(), &Default::default()).unwrap();
    let err = engine.query(&db.id, MARY_Q, None).unwrap_err();
    assert!(matches!(err, ServiceError::BackendUnavailable(_)), "{err:?}");
    assert_eq!(err.kind(), "backend_unavailable");
}
