//! A minimal stand-in for a Gerrit change-list endpoint on a local port.
//! Serves `total` changes with two messages each, honours `n`, `S` and a
//! `limit:N` term in `q`, and can answer the first requests with HTTP 500.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::json;

pub const PROJECTS: [&str; 3] = ["platform/build", "tools/repo", "infra/ci"];

#[derive(Default)]
pub struct Behaviour {
    pub total: usize,
    /// Requests answered with 500 before serving normally.
    pub fail_first: usize,
    /// Skip offsets that always fail.
    pub broken_skips: Vec<usize>,
    pub no_prefix: bool,
}

pub struct MockGerrit {
    pub base_url: String,
    pub requests: Arc<AtomicUsize>,
}

pub fn change_id(i: usize) -> String {
    format!("{}~master~I{:040x}", PROJECTS[i % 3].replace('/', "%2F"), i)
}

pub fn start(behaviour: Behaviour) -> MockGerrit {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}/", listener.local_addr().unwrap());
    let requests = Arc::new(AtomicUsize::new(0));
    let behaviour = Arc::new(behaviour);
    let counter = requests.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let behaviour = behaviour.clone();
            let counter = counter.clone();
            std::thread::spawn(move || handle(stream, &behaviour, &counter));
        }
    });
    MockGerrit { base_url, requests }
}

fn handle(mut stream: TcpStream, b: &Behaviour, counter: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h).map_or(true, |n| n == 0) || h == "\r\n" {
            break;
        }
    }
    let nth = counter.fetch_add(1, Ordering::SeqCst);
    let target = request_line.split_whitespace().nth(1).unwrap_or("/");
    let url = url::Url::parse(&format!("http://mock{target}")).unwrap();
    let param = |k: &str| url.query_pairs().find(|(n, _)| n == k).map(|(_, v)| v.into_owned());
    let skip: usize = param("S").and_then(|s| s.parse().ok()).unwrap_or(0);

    if url.path() != "/changes/" {
        return respond(&mut stream, 404, "Not found");
    }
    if nth < b.fail_first || b.broken_skips.contains(&skip) {
        return respond(&mut stream, 500, "Internal server error");
    }
    let n: usize = param("n").and_then(|s| s.parse().ok()).unwrap_or(25);
    let q = param("q").unwrap_or_default();
    let limit = q
        .split_whitespace()
        .find_map(|t| t.strip_prefix("limit:"))
        .and_then(|v| v.parse().ok())
        .unwrap_or(usize::MAX);
    let total = b.total.min(limit);
    let end = (skip + n).min(total);
    let mut page: Vec<serde_json::Value> = (skip.min(end)..end)
        .map(|i| {
            json!({
                "id": change_id(i),
                "project": PROJECTS[i % 3],
                "_number": 1000 + i,
                "messages": [
                    {"id": format!("m{i}a"), "message": format!("Patch Set 1:\n\nWhy not use get_value{i} here?")},
                    {"id": format!("m{i}b"), "message": "Patch Set 2: Code-Review+2"},
                ],
            })
        })
        .collect();
    if end < total {
        if let Some(last) = page.last_mut() {
            last["_more_changes"] = json!(true);
        }
    }
    let mut body = if b.no_prefix { String::new() } else { ")]}'\n".to_string() };
    body.push_str(&serde_json::to_string(&page).unwrap());
    respond(&mut stream, 200, &body)
}

fn respond(stream: &mut TcpStream, status: u16, body: &str) {
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
}

/// An address nothing listens on.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}/")
}
