//! Review messages from a Gerrit server's REST API.
//!
//! Changes are listed with `GET <base>/changes/?q=<query>&o=MESSAGES&n=<page>&S=<skip>`.
//! Gerrit prefixes JSON bodies with a `)]}'` line to defeat cross-site script
//! inclusion; it is removed before parsing. The last change of a page carries
//! `_more_changes: true` when further pages exist.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use url::Url;

use crate::corpus::Comment;
use crate::error::{Error, Result};

pub const XSSI_PREFIX: &str = ")]}'";

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub base_url: String,
    pub query: String,
    pub page_size: usize,
    /// Stop after this many distinct changes.
    pub max_changes: Option<usize>,
    /// Pages requested in parallel.
    pub concurrency: usize,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl FetchConfig {
    pub fn new(base_url: impl Into<String>, query: impl Into<String>) -> Self {
        FetchConfig {
            base_url: base_url.into(),
            query: query.into(),
            page_size: 100,
            max_changes: None,
            concurrency: 4,
            max_attempts: 5,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChangeInfo {
    pub id: String,
    pub project: String,
    #[serde(rename = "_number", default)]
    pub number: Option<u64>,
    #[serde(default)]
    pub messages: Vec<ChangeMessage>,
    #[serde(rename = "_more_changes", default)]
    pub more_changes: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChangeMessage {
    pub id: String,
    #[serde(default)]
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct FetchOutcome {
    pub comments: Vec<Comment>,
    pub changes: usize,
    /// True when fetching stopped early because of an error or cancellation.
    pub partial: bool,
    pub errors: Vec<String>,
}

/// Removes the `)]}'` guard line if present.
pub fn strip_xssi_prefix(body: &str) -> &str {
    match body.strip_prefix(XSSI_PREFIX) {
        Some(rest) => rest.trim_start_matches(['\r', '\n']),
        None => body,
    }
}

pub fn parse_changes(body: &str) -> Result<Vec<ChangeInfo>> {
    serde_json::from_str(strip_xssi_prefix(body))
        .map_err(|e| Error::Network(format!("malformed change list: {e}")))
}

pub fn changes_url(config: &FetchConfig, skip: usize) -> Result<Url> {
    let mut base = config.base_url.clone();
    if !base.ends_with('/') {
        base.push('/');
    }
    let base = Url::parse(&base).map_err(|e| Error::Config(format!("base URL: {e}")))?;
    let mut url = base
        .join("changes/")
        .map_err(|e| Error::Config(format!("base URL: {e}")))?;
    url.query_pairs_mut()
        .append_pair("q", &config.query)
        .append_pair("o", "MESSAGES")
        .append_pair("n", &config.page_size.to_string())
        .append_pair("S", &skip.to_string());
    Ok(url)
}

pub struct GerritClient {
    http: reqwest::blocking::Client,
    config: FetchConfig,
}

enum Attempt {
    Retry(String),
    Fail(String),
}

impl GerritClient {
    pub fn new(config: FetchConfig) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(GerritClient { http, config })
    }

    fn get_once(&self, url: &Url) -> Result<String, Attempt> {
        let resp = self
            .http
            .get(url.clone())
            .header("Accept", "application/json")
            .send()
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retry(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fail(format!("{url}: HTTP {status}")));
        }
        resp.text().map_err(|e| Attempt::Retry(e.to_string()))
    }

    /// One page, retried with exponential backoff.
    pub fn fetch_page(&self, skip: usize) -> Result<Vec<ChangeInfo>> {
        let url = changes_url(&self.config, skip)?;
        let attempts = self.config.max_attempts.max(1);
        let mut delay = self.config.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.get_once(&url) {
                Ok(body) => return parse_changes(&body),
                Err(Attempt::Fail(msg)) => return Err(Error::Network(msg)),
                Err(Attempt::Retry(msg)) => last = msg,
            }
            if attempt < attempts {
                thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
        }
        Err(Error::Network(format!("{last} (after {attempts} attempts)")))
    }

    /// Pages through the query. Pages are requested `concurrency` at a time
    /// and consumed in order; a set `cancel` flag stops before the next batch.
    pub fn fetch_all(&self, cancel: Option<&AtomicBool>) -> Result<FetchOutcome> {
        let page = self.config.page_size.max(1);
        let width = self.config.concurrency.max(1);
        let mut outcome = FetchOutcome::default();
        let mut seen = HashSet::new();
        let mut skip = 0;

        'batches: loop {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                outcome.partial = true;
                break;
            }
            let skips: Vec<usize> = (0..width).map(|i| skip + i * page).collect();
            let results: Vec<Result<Vec<ChangeInfo>>> = thread::scope(|scope| {
                let handles: Vec<_> = skips
                    .iter()
                    .map(|&s| scope.spawn(move || self.fetch_page(s)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("page fetch panicked"))
                    .collect()
            });

            for result in results {
                let changes = match result {
                    Ok(changes) => changes,
                    Err(e) => {
                        if outcome.changes == 0 {
                            return Err(e);
                        }
                        outcome.partial = true;
                        outcome.errors.push(e.to_string());
                        break 'batches;
                    }
                };
                let more = changes.last().is_some_and(|c| c.more_changes);
                for change in changes {
                    if self
                        .config
                        .max_changes
                        .is_some_and(|max| outcome.changes >= max)
                    {
                        break 'batches;
                    }
                    if !seen.insert(change.id.clone()) {
                        continue;
                    }
                    outcome.changes += 1;
                    for msg in change.messages {
                        outcome.comments.push(Comment {
                            id: format!("{}/{}", change.id, msg.id),
                            project: change.project.clone(),
                            message: msg.message,
                        });
                    }
                }
                if !more {
                    break 'batches;
                }
            }
            skip += width * page;
        }
        Ok(outcome)
    }
}

pub fn fetch_remote(config: FetchConfig, cancel: Option<&AtomicBool>) -> Result<FetchOutcome> {
    GerritClient::new(config)?.fetch_all(cancel)
}
