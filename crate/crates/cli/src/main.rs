//! `museum`: ingest pages, score and rank them, explain a segment's score.

mod config;
mod explain;

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use museum_core::evolution::TrackError;
use museum_core::profile::{ProfileError, UserProfile};
use museum_core::rank::rank_pages;
use museum_core::{
    segment_page, EvolutionTrack, Fingerprint, PageSnapshot, Query, RankJob, RawPage, ScoreRequest,
    ScoreError, Scorer, StoreError, Timestamp, TrackStore,
};
use serde::Serialize;

use config::{EngineConfig, STORE_ENV};

#[derive(Debug, Parser)]
#[command(name = "museum", version, about = "Segment-level relevance scoring over page histories")]
struct Cli {
    /// Config file; defaults to ./museum.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Store root; overrides MUSEUM_STORE and store.root.
    #[arg(long, global = true)]
    store: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment an HTML page and append it to the URL's track.
    Ingest {
        /// HTML file; `-` or omitted reads standard input.
        html: Option<PathBuf>,
        #[arg(long)]
        url: String,
        /// Capture time, seconds since the Unix epoch.
        #[arg(long, allow_hyphen_values = true)]
        captured_at: Timestamp,
    },
    /// Score the latest (or `--at`) snapshot of a URL.
    Score {
        #[arg(long)]
        url: String,
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<Timestamp>,
    },
    /// Rank URLs by page score, highest first.
    Rank {
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(required = true)]
        urls: Vec<String>,
    },
    /// Show the matches behind one segment's coefficients.
    Explain {
        #[arg(long)]
        url: String,
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        fingerprint: String,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<Timestamp>,
    },
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_STORE: u8 = 3;

impl Failure {
    fn validation(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_VALIDATION, error: error.into() }
    }

    fn store(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_STORE, error: error.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Track(_) => Failure::validation(e),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => Failure::store(e),
        }
    }
}

type Outcome = Result<String, Failure>;

struct Engine {
    config: EngineConfig,
    store: Option<TrackStore>,
}

impl Engine {
    fn open(cli: &Cli) -> Result<Self, Failure> {
        let config = EngineConfig::load(cli.config.as_deref()).map_err(Failure::validation)?;
        let root = cli
            .store
            .clone()
            .or_else(|| std::env::var_os(STORE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| config.store_root.clone());
        Ok(Engine { store: root.map(TrackStore::new), config })
    }

    fn store(&self) -> Result<&TrackStore, Failure> {
        self.store.as_ref().ok_or_else(|| {
            Failure::validation(anyhow::anyhow!(
                "no store configured: pass --store, set {STORE_ENV}, or set store.root"
            ))
        })
    }

    fn scorer(&self) -> Scorer<'_> {
        Scorer::new(&self.config.lexicon, &self.config.visual).with_depth(self.config.depth)
    }

    fn query(&self, text: &str) -> Result<Query, Failure> {
        let q = Query::parse(text, &self.config.tokenizer, &self.config.lexicon);
        if q.is_empty() {
            return Err(Failure::validation(ScoreError::EmptyQuery));
        }
        Ok(q)
    }

    fn profile(&self, path: Option<&Path>) -> Result<UserProfile, Failure> {
        match path {
            None => Ok(UserProfile::anonymous()),
            Some(p) => UserProfile::load(p, &self.config.tokenizer).map_err(|e| match e {
                ProfileError::NotFound(_) | ProfileError::Parse { .. } => Failure::validation(e),
            }),
        }
    }

    fn track(&self, url: &str) -> Result<EvolutionTrack, Failure> {
        let track = self.store()?.load(url)?;
        if track.is_empty() {
            return Err(Failure::validation(anyhow::anyhow!("unknown url `{url}`")));
        }
        Ok(track)
    }
}

fn pick(track: &EvolutionTrack, at: Option<Timestamp>) -> Result<&PageSnapshot, Failure> {
    match at {
        None => Ok(track.latest().expect("track is non-empty")),
        Some(t) => track.snapshot_at(t).ok_or_else(|| {
            Failure::validation(anyhow::anyhow!("`{}` has no snapshot captured at {t}", track.url()))
        }),
    }
}

fn json<T: Serialize>(value: &T) -> Outcome {
    let mut s = serde_json::to_string_pretty(value).map_err(Failure::store)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct IngestReport<'a> {
    url: &'a str,
    captured_at: Timestamp,
    segment_count: usize,
}

fn read_html(path: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read(p).map_err(|e| Failure::validation(anyhow::Error::new(e).context(format!("cannot read {}", p.display())))),
    }
}

fn read_stdin() -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    io::stdin()
        .read_to_end(&mut buf)
        .map_err(|e| Failure::validation(anyhow::Error::new(e).context("cannot read standard input")))?;
    Ok(buf)
}

fn run(cli: &Cli) -> Outcome {
    let engine = Engine::open(cli)?;
    match &cli.command {
        Command::Ingest { html, url, captured_at } => {
            let store = engine.store()?;
            let bytes = read_html(html.as_deref())?;
            let raw = RawPage::new(url.as_str(), *captured_at, bytes);
            let snap = segment_page(&raw, &engine.config.segmenter, &engine.config.tokenizer)
                .map_err(|e| Failure::validation(anyhow::Error::new(e).context(format!("cannot segment `{url}`"))))?;
            store.ingest(&snap)?;
            json(&IngestReport {
                url: &snap.url,
                captured_at: snap.captured_at,
                segment_count: snap.segments.len(),
            })
        }
        Command::Score { url, query, profile, at } => {
            let query = engine.query(query)?;
            let profile = engine.profile(profile.as_deref())?;
            let track = engine.track(url)?;
            let snap = pick(&track, *at)?;
            let req = ScoreRequest { query: &query, profile: &profile.keywords, track: &track };
            let score = engine.scorer().score_page(snap, &req).map_err(Failure::validation)?;
            json(&score)
        }
        Command::Rank { query, profile, urls } => {
            let query = engine.query(query)?;
            let profile = engine.profile(profile.as_deref())?;
            let store = engine.store()?;
            let mut tracks = Vec::with_capacity(urls.len());
            let mut unknown = Vec::new();
            for url in urls {
                let track = store.load(url)?;
                if track.is_empty() {
                    unknown.push(url.as_str());
                } else {
                    tracks.push(track);
                }
            }
            if !unknown.is_empty() {
                return Err(Failure::validation(anyhow::anyhow!("unknown urls: {}", unknown.join(" "))));
            }
            let jobs: Vec<RankJob> = tracks
                .iter()
                .map(|t| RankJob { snapshot: t.latest().expect("track is non-empty"), track: t })
                .collect();
            let ranked = rank_pages(&engine.scorer(), &jobs, &query, &profile.keywords).map_err(Failure::validation)?;
            json(&ranked)
        }
        Command::Explain { url, query, fingerprint, profile, at } => {
            let query = engine.query(query)?;
            let profile = engine.profile(profile.as_deref())?;
            let fp: Fingerprint = fingerprint
                .parse()
                .map_err(|_| Failure::validation(anyhow::anyhow!("malformed fingerprint `{fingerprint}`")))?;
            let track = engine.track(url)?;
            let snap = pick(&track, *at)?;
            let seg = snap.segment(fp).ok_or_else(|| {
                Failure::validation(anyhow::anyhow!(
                    "unknown fingerprint {fingerprint} in snapshot {} of `{url}`",
                    snap.captured_at
                ))
            })?;
            let req = ScoreRequest { query: &query, profile: &profile.keywords, track: &track };
            Ok(explain::render(seg, &engine.scorer().explain_segment(snap, seg, &req)))
        }
    }
}

/// Error variant name for the failures scripts most often branch on.
fn kind(error: &anyhow::Error) -> Option<&'static str> {
    if let Some(StoreError::Track(t)) = error.downcast_ref::<StoreError>() {
        return Some(match t {
            TrackError::UrlMismatch { .. } => "UrlMismatch",
            TrackError::NonMonotonicTimestamp { .. } => "NonMonotonicTimestamp",
        });
    }
    match error.downcast_ref::<ScoreError>() {
        Some(ScoreError::EmptyQuery) => Some("EmptyQuery"),
        Some(ScoreError::NoSegments) => Some("NoSegments"),
        None => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_STORE);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            match kind(&f.error) {
                Some(k) => eprintln!("museum: {k}: {f}"),
                None => eprintln!("museum: {f}"),
            }
            ExitCode::from(f.code)
        }
    }
}
