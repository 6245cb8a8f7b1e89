use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::Arc;

use spoofeval_service::store::read_log;
use spoofeval_service::{http, progress_series as series, Platform, PlatformConfig, SystemClock};

use crate::args::{Format, ProgressSeriesArgs, ServeArgs};
use crate::error::{ctx, CliError, CliResult};
use crate::output::{json, Output};

pub fn serve(a: &ServeArgs) -> CliResult<()> {
    let mut cfg = PlatformConfig::load(&a.config).map_err(ctx(&a.config))?;
    if let Some(p) = a.port {
        cfg.server.port = p;
    }
    if let Some(d) = &a.data_dir {
        cfg.server.data_dir = d.clone();
    }
    let addr = SocketAddr::from(([0, 0, 0, 0], cfg.server.port));
    let platform = Platform::open(cfg, Arc::new(SystemClock)).map_err(CliError::data)?;
    let rt = tokio::runtime::Runtime::new().map_err(CliError::data)?;
    rt.block_on(http::serve(Arc::new(platform), addr))
        .map_err(|e| CliError::Data(format!("{addr}: {e}")))
}

pub fn progress_series(a: &ProgressSeriesArgs, out: &mut Output) -> CliResult<()> {
    let dir = match (&a.data_dir, &a.config) {
        (Some(d), _) => d.clone(),
        (None, Some(c)) => PlatformConfig::load(c).map_err(ctx(c))?.server.data_dir,
        (None, None) => return Err(CliError::Usage("give --config or --data-dir".into())),
    };
    let records = read_log(&dir).map_err(CliError::data)?;
    let s = series(&records, a.task, a.phase);
    out.report(&match out.format {
        Format::Human => {
            let mut t = format!("{} {} best {} per UTC day\n", s.task, s.phase, s.metric);
            writeln!(t, "{:<10}  {:>10}  {:>11}", "date", "best", "submissions").unwrap();
            for p in &s.points {
                writeln!(t, "{:<10}  {:>10.4}  {:>11}", p.date, p.best, p.submissions).unwrap();
            }
            t
        }
        Format::Kv => {
            let mut t = String::from("date,best,submissions\n");
            for p in &s.points {
                writeln!(t, "{},{},{}", p.date, p.best, p.submissions).unwrap();
            }
            t
        }
        Format::Structured => json(&s),
    })
}
