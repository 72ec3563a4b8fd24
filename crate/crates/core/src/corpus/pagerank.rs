//! Domain PageRank records: an offline TSV cache and a client for the
//! OpenPageRank HTTP API that fills it.
//!
//! The pipeline only ever reads the cache. Network access happens in
//! [`fetch_pagerank`], which merges what it gets into the cache file so
//! that later runs are reproducible without the network.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::events;

pub const DEFAULT_ENDPOINT: &str = "https://openpagerank.com/api/v1.0/getPageRank";
pub const MAX_BATCH: usize = 100;
const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankRecord {
    /// Lowercase registrable domain, no scheme or path.
    pub domain: String,
    pub pr_rank: Option<u64>,
    pub page_rank_integer: Option<u8>,
    pub page_rank_decimal: Option<f64>,
    /// Unix seconds.
    pub fetched_at: u64,
}

impl PageRankRecord {
    /// Build a record whose integer score is the decimal score rounded half-up.
    pub fn new(domain: &str, pr_rank: Option<u64>, decimal: Option<f64>, fetched_at: u64) -> Self {
        PageRankRecord {
            domain: domain.to_ascii_lowercase(),
            pr_rank,
            page_rank_integer: decimal.map(round_half_up),
            page_rank_decimal: decimal,
            fetched_at,
        }
    }
}

pub fn round_half_up(x: f64) -> u8 {
    (x + 0.5).floor().clamp(0.0, 10.0) as u8
}

/// Registrable domain (public suffix plus one label) of a host name.
pub fn registrable_domain(host: &str) -> Option<String> {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    psl::domain_str(&host).map(str::to_owned)
}

/// Registrable domain of a document URL.
pub fn url_domain(url: &str) -> Option<String> {
    let parsed = url::Url::parse(url).ok()?;
    registrable_domain(parsed.host_str()?)
}

/// In-memory view of the PageRank cache file, keyed by domain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageRankCache {
    records: BTreeMap<String, PageRankRecord>,
}

impl PageRankCache {
    pub fn get(&self, domain: &str) -> Option<&PageRankRecord> {
        self.records.get(domain)
    }

    pub fn insert(&mut self, record: PageRankRecord) {
        self.records.insert(record.domain.clone(), record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &PageRankRecord> {
        self.records.values()
    }

    /// Load a cache file; a missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cache = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::PageRank(format!("cache line {}: {what}", lineno + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(bad("expected 5 tab-separated columns"));
            }
            let pr_rank = parse_opt::<u64>(cols[1]).ok_or_else(|| bad("bad pr_rank"))?;
            let integer = parse_opt::<u8>(cols[2]).ok_or_else(|| bad("bad page_rank_integer"))?;
            let decimal = parse_opt::<f64>(cols[3]).ok_or_else(|| bad("bad page_rank_decimal"))?;
            let fetched_at = cols[4].parse::<u64>().map_err(|_| bad("bad fetched_at"))?;
            if let (Some(i), Some(d)) = (integer, decimal) {
                if i != round_half_up(d) {
                    return Err(bad("page_rank_integer is not the rounded decimal score"));
                }
            }
            let domain = cols[0].trim();
            if domain.is_empty() || domain.contains('/') || domain.contains(':') {
                return Err(bad("domain must be a bare host name"));
            }
            cache.insert(PageRankRecord {
                domain: domain.to_ascii_lowercase(),
                pr_rank,
                page_rank_integer: integer,
                page_rank_decimal: decimal,
                fetched_at,
            });
        }
        Ok(cache)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in self.records.values() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.domain,
                fmt_opt(r.pr_rank),
                fmt_opt(r.page_rank_integer),
                fmt_opt(r.page_rank_decimal),
                r.fetched_at
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Some(None) for the "unknown" sentinel, None for garbage.
fn parse_opt<T: std::str::FromStr>(s: &str) -> Option<Option<T>> {
    let s = s.trim();
    if s == UNKNOWN {
        Some(None)
    } else {
        s.parse().ok().map(Some)
    }
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string())
        .unwrap_or_else(|| UNKNOWN.to_owned())
}

/// Connection settings for the OpenPageRank API.
#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub endpoint: String,
    pub api_key: String,
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl FetchConfig {
    pub fn new(api_key: impl Into<String>) -> Self {
        FetchConfig {
            endpoint: DEFAULT_ENDPOINT.to_owned(),
            api_key: api_key.into(),
            attempts: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

/// Outcome of a fetch: one record per requested domain, in request order.
/// Domains the service could not resolve, or whose batch failed, carry
/// unknown scores.
#[derive(Debug, Clone, Default)]
pub struct FetchReport {
    pub records: Vec<PageRankRecord>,
    /// Domains whose batch failed after all retries.
    pub failed: Vec<String>,
    /// Set when the service reported an exhausted quota; later batches
    /// were not requested.
    pub quota_exceeded: bool,
}

#[derive(Deserialize)]
struct ApiResponse {
    #[serde(default)]
    response: Vec<ApiEntry>,
}

#[derive(Deserialize)]
struct ApiEntry {
    domain: String,
    #[serde(default)]
    status_code: u16,
    page_rank_decimal: Option<serde_json::Value>,
    rank: Option<serde_json::Value>,
}

fn json_number<T: std::str::FromStr>(v: &Option<serde_json::Value>) -> Option<T> {
    match v.as_ref()? {
        serde_json::Value::Number(n) => n.to_string().parse().ok(),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

enum BatchOutcome {
    Ok(Vec<PageRankRecord>),
    Failed,
    Quota,
}

/// Query the API for `domains` in batches of at most [`MAX_BATCH`].
pub fn fetch_pagerank(domains: &[String], config: &FetchConfig) -> FetchReport {
    let mut report = FetchReport::default();
    if domains.is_empty() {
        return report;
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let now = now_unix();
    let unknown = |d: &String| PageRankRecord::new(d, None, None, now);
    let mut batches = domains.chunks(MAX_BATCH);
    for batch in batches.by_ref() {
        match fetch_batch(&agent, batch, config, now) {
            BatchOutcome::Ok(found) => {
                for d in batch {
                    let rec = found
                        .iter()
                        .find(|r| r.domain == d.to_ascii_lowercase())
                        .cloned()
                        .unwrap_or_else(|| unknown(d));
                    report.records.push(rec);
                }
            }
            BatchOutcome::Failed => {
                events::emit("pagerank_batch_failed", json!({"domains": batch.len()}));
                report.failed.extend(batch.iter().cloned());
                report.records.extend(batch.iter().map(unknown));
            }
            BatchOutcome::Quota => {
                report.quota_exceeded = true;
                report.failed.extend(batch.iter().cloned());
                report.records.extend(batch.iter().map(unknown));
                break;
            }
        }
    }
    if report.quota_exceeded {
        let remaining: Vec<String> = batches.flatten().cloned().collect();
        events::emit(
            "pagerank_quota_exceeded",
            json!({"fetched": report.records.len() - report.failed.len(), "unrequested": remaining.len()}),
        );
        report.records.extend(remaining.iter().map(unknown));
        report.failed.extend(remaining);
    }
    report
}

fn fetch_batch(
    agent: &ureq::Agent,
    batch: &[String],
    config: &FetchConfig,
    now: u64,
) -> BatchOutcome {
    let mut delay = config.initial_backoff;
    for attempt in 1..=config.attempts {
        let mut request = agent
            .get(&config.endpoint)
            .header("API-OPR", &config.api_key);
        for d in batch {
            request = request.query("domains[]", d);
        }
        match request.call() {
            Ok(mut response) => {
                let status = response.status().as_u16();
                if status == 429 {
                    return BatchOutcome::Quota;
                }
                if status == 200 {
                    let body = response.body_mut().read_to_string().unwrap_or_default();
                    match serde_json::from_str::<ApiResponse>(&body) {
                        Ok(parsed) => return BatchOutcome::Ok(records_from(parsed, now)),
                        Err(e) => events::emit(
                            "pagerank_bad_response",
                            json!({"attempt": attempt, "error": e.to_string()}),
                        ),
                    }
                } else {
                    events::emit(
                        "pagerank_http_error",
                        json!({"attempt": attempt, "status": status}),
                    );
                }
            }
            Err(e) => {
                events::emit(
                    "pagerank_http_error",
                    json!({"attempt": attempt, "error": e.to_string()}),
                );
            }
        }
        if attempt < config.attempts {
            std::thread::sleep(delay);
            delay *= 2;
        }
    }
    BatchOutcome::Failed
}

fn records_from(parsed: ApiResponse, now: u64) -> Vec<PageRankRecord> {
    parsed
        .response
        .into_iter()
        .filter(|e| e.status_code == 200 || e.status_code == 0)
        .filter_map(|e| {
            let decimal: Option<f64> = json_number(&e.page_rank_decimal);
            decimal?;
            Some(PageRankRecord::new(
                &e.domain,
                json_number(&e.rank),
                decimal,
                now,
            ))
        })
        .collect()
}

/// Fetch and merge resolved records into the cache file at `path`.
/// Failed or unresolved domains are not written, so a later fetch can
/// fill them in.
pub fn fetch_into_cache(
    domains: &[String],
    config: &FetchConfig,
    path: &Path,
) -> Result<FetchReport> {
    let mut cache = PageRankCache::load(path)?;
    let report = fetch_pagerank(domains, config);
    for rec in &report.records {
        if rec.page_rank_decimal.is_some() {
            cache.insert(rec.clone());
        }
    }
    cache.save(path)?;
    Ok(report)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    use super::*;

    /// Serve `responses` in order, one per connection; returns the URL and
    /// a request counter.
    fn serve(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for (stream, (status, body)) in listener.incoming().zip(responses) {
                let mut stream = stream.unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                while reader.read_line(&mut line).unwrap() > 0 && line != "\r\n" {
                    line.clear();
                }
                counter.fetch_add(1, Ordering::SeqCst);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/api/v1.0/getPageRank"), hits)
    }

    fn config(endpoint: String) -> FetchConfig {
        FetchConfig {
            endpoint,
            api_key: "k".into(),
            attempts: 3,
            initial_backoff: Duration::from_millis(1),
            timeout: Duration::from_secs(5),
        }
    }

    #[test]
    fn empty_input_issues_no_request() {
        let report = fetch_pagerank(&[], &config("http://127.0.0.1:9/none".into()));
        assert!(report.records.is_empty());
        assert!(report.failed.is_empty());
    }

    #[test]
    fn parses_api_response() {
        let body = r#"{"status_code":200,"response":[{"status_code":200,"error":"","page_rank_integer":7,"page_rank_decimal":7.49,"rank":"312","domain":"cdc.gov"},{"status_code":404,"error":"Domain not found","page_rank_integer":0,"page_rank_decimal":0,"rank":null,"domain":"nowhere.zz"}]}"#;
        let (url, hits) = serve(vec![(200, body.into())]);
        let report = events::capture(|| {
            fetch_pagerank(&["cdc.gov".into(), "nowhere.zz".into()], &config(url))
        })
        .0;
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        assert_eq!(report.records[0].pr_rank, Some(312));
        assert_eq!(report.records[0].page_rank_integer, Some(7));
        assert_eq!(report.records[1].page_rank_decimal, None);
        assert!(report.failed.is_empty());
    }

    #[test]
    fn three_server_errors_mark_batch_unknown() {
        let (url, hits) = serve(vec![(500, "{}".into()); 3]);
        let (report, events) =
            events::capture(|| fetch_pagerank(&["cdc.gov".into()], &config(url)));
        assert_eq!(hits.load(Ordering::SeqCst), 3);
        assert_eq!(report.failed, vec!["cdc.gov".to_owned()]);
        assert_eq!(report.records[0].page_rank_decimal, None);
        assert!(events.iter().any(|e| e["event"] == "pagerank_batch_failed"));
    }

    #[test]
    fn quota_stops_further_batches() {
        let ok = r#"{"response":[{"status_code":200,"page_rank_decimal":3.5,"rank":"9","domain":"d0.com"}]}"#;
        let (url, hits) = serve(vec![(200, ok.into()), (429, "{}".into())]);
        let domains: Vec<String> = (0..250).map(|i| format!("d{i}.com")).collect();
        let report = events::capture(|| fetch_pagerank(&domains, &config(url))).0;
        assert_eq!(hits.load(Ordering::SeqCst), 2);
        assert!(report.quota_exceeded);
        assert_eq!(report.records.len(), 250);
        assert_eq!(report.records[0].page_rank_integer, Some(4));
        assert_eq!(report.failed.len(), 150);
    }

    #[test]
    fn cache_round_trip_and_invariant() {
        let mut cache = PageRankCache::default();
        cache.insert(PageRankRecord::new("cdc.gov", Some(312), Some(7.49), 10));
        cache.insert(PageRankRecord::new("x.org", None, None, 11));
        let parsed = PageRankCache::parse(&cache.to_tsv()).unwrap();
        assert_eq!(parsed, cache);
        for r in parsed.records() {
            if let (Some(i), Some(d)) = (r.page_rank_integer, r.page_rank_decimal) {
                assert_eq!(i, round_half_up(d));
            }
        }
        assert!(PageRankCache::parse("a.com\t1\t3\t7.49\t0\n").is_err());
        assert!(PageRankCache::parse("http://a.com/x\t1\t7\t7.49\t0\n").is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(7.5), 8);
        assert_eq!(round_half_up(7.49), 7);
        assert_eq!(round_half_up(0.5), 1);
    }

    #[test]
    fn registrable_domains() {
        assert_eq!(
            registrable_domain("www.cdc.gov").as_deref(),
            Some("cdc.gov")
        );
        assert_eq!(
            registrable_domain("news.bbc.co.uk").as_deref(),
            Some("bbc.co.uk")
        );
    }
}
