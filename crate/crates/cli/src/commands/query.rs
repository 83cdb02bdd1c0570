use std::fs::OpenOptions;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};

use lectern::llm::{HttpGateway, LanguageModel};
use lectern::query::{answer_query, Library, QueryOptions, QueryOutcome};
use serde_json::json;

use crate::config::AppConfig;
use crate::exit::{CliError, CliResult, OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Answer one question and exit; without it, read questions from stdin.
    #[arg(long, value_name = "QUESTION")]
    ask: Option<String>,
    /// Skip the language model: pattern terms and the template answer only.
    #[arg(long)]
    no_llm: bool,
    /// Also print the scored matches behind each answer, as JSON.
    #[arg(long)]
    explain: bool,
    /// Index JSON file; overrides `index_path`.
    #[arg(long, value_name = "PATH")]
    index: Option<PathBuf>,
    /// Navigation tree JSON file; overrides `nav_tree_path`.
    #[arg(long, value_name = "PATH")]
    nav: Option<PathBuf>,
    /// Minimum match score; overrides `threshold`.
    #[arg(long)]
    threshold: Option<f64>,
    /// Query log file; overrides `query_log`.
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
    /// Do not log queries.
    #[arg(long, conflicts_with = "log")]
    no_log: bool,
}

pub fn run(args: &Args, mut cfg: AppConfig) -> CliResult {
    if let Some(p) = &args.index {
        cfg.index_path = Some(p.clone());
    }
    if let Some(p) = &args.nav {
        cfg.nav_tree_path = Some(p.clone());
    }
    if let Some(t) = args.threshold {
        cfg.threshold = t;
    }
    cfg.validate()?;
    let library = cfg.library()?;
    let options = cfg.query_options();
    let log_path = (!args.no_log).then(|| args.log.clone().unwrap_or_else(|| cfg.query_log.clone()));

    let gateway = if args.no_llm {
        None
    } else {
        cfg.gateway.validate().map_err(CliError::usage)?;
        let g = HttpGateway::new(cfg.gateway.clone());
        if g.is_available() {
            Some(g)
        } else {
            eprintln!(
                "lectern: warning: no inference server at {}; answering from the index alone",
                cfg.gateway.base_url
            );
            None
        }
    };
    let model = gateway.as_ref().map(|g| g as &dyn LanguageModel);
    let session = Session {
        library: &library,
        model,
        options,
        explain: args.explain,
        log_path: log_path.as_deref(),
    };

    match &args.ask {
        Some(q) => {
            if q.trim().is_empty() {
                return Err(CliError::usage("--ask needs a non-empty question"));
            }
            session.answer(q.trim(), &mut io::stdout().lock());
        }
        None => session.repl()?,
    }
    Ok(OK)
}

struct Session<'a> {
    library: &'a Library,
    model: Option<&'a dyn LanguageModel>,
    options: QueryOptions,
    explain: bool,
    log_path: Option<&'a Path>,
}

impl Session<'_> {
    fn answer(&self, query: &str, out: &mut impl Write) {
        let outcome = answer_query(query, self.library, self.model, &self.options);
        if self.explain {
            let explained =
                serde_json::to_string_pretty(&outcome.explain(self.options.threshold)).expect("json values serialize");
            let _ = writeln!(out, "{explained}");
        }
        let _ = writeln!(out, "{}", outcome.answer.render());
        let _ = out.flush();
        if let Some(path) = self.log_path {
            if let Err(e) = append_log(path, &outcome) {
                eprintln!("lectern: warning: cannot write query log {}: {e}", path.display());
            }
        }
    }

    /// One question per line until end of input. Blank lines are skipped.
    fn repl(&self) -> Result<(), CliError> {
        let stdin = io::stdin();
        let interactive = stdin.is_terminal();
        let mut stdout = io::stdout().lock();
        let mut first = true;
        loop {
            if interactive {
                let _ = write!(stdout, "> ");
                let _ = stdout.flush();
            }
            let mut line = String::new();
            let n = stdin
                .lock()
                .read_line(&mut line)
                .map_err(|e| CliError::failure(format!("reading stdin: {e}")))?;
            if n == 0 {
                break;
            }
            let q = line.trim();
            if q.is_empty() {
                continue;
            }
            if !first && !interactive {
                let _ = writeln!(stdout);
            }
            first = false;
            self.answer(q, &mut stdout);
        }
        Ok(())
    }
}

fn append_log(path: &Path, outcome: &QueryOutcome) -> io::Result<()> {
    let entry = json!({
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "query": outcome.query,
        "top_topics": outcome.top_topics(),
        "mode": outcome.mode(),
    });
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{entry}")
}
