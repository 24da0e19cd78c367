use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use quadratik_api::http::{DataRef, ServiceRequest};
use quadratik_api::series::aux_tables;
use quadratik_api::{ApiError, CsvOptions, Envelope, Inputs, Operation, Output, Table, DEFAULT_SEED};
use quadratik_client::{route, Client, ClientError};
use quadratik_core::clustering::MixtureFit;
use serde_json::Value;

use crate::args::{Cli, Command, Fields, Format, Input};

/// Bad flags or unreadable inputs: exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    if let Some(a) = e.downcast_ref::<ApiError>() {
        return match a {
            ApiError::Compute(_) | ApiError::Cancelled => 1,
            ApiError::Parse { .. } | ApiError::InvalidParameter(_) => 2,
        };
    }
    if let Some(ClientError::Service { body, .. }) = e.downcast_ref::<ClientError>() {
        return match body.code.as_str() {
            "parse_error" | "invalid_parameter" | "not_found" | "payload_too_large" => 2,
            _ => 1,
        };
    }
    1
}

/// A parsed command: the request plus where its inputs live.
struct Job<'a> {
    op: Operation,
    input: Option<&'a Input>,
    y: Option<&'a Path>,
    fits: Option<&'a Path>,
}

fn build(cmd: &Command) -> Result<Job<'_>> {
    let mut f;
    let (mut input, mut y, mut fits) = (None, None, None);
    match cmd {
        Command::NormalTest { input: i, h, mu, sigma, centering, replicates, quantile } => {
            f = Fields::new("normal-test");
            f.put("h", Some(*h))
                .put("mu", mu.clone().map(|m| m.0))
                .put("sigma", sigma.clone().map(|s| serde_json::to_value(s.0).expect("finite rows")))
                .put("centering", centering.clone())
                .put("replicates", *replicates)
                .put("quantile", *quantile);
            input = Some(i);
        }
        Command::TwosampleTest { input: i, y: second, h, plan } => {
            f = Fields::new("twosample-test");
            f.put("h", Some(*h)).plan(plan);
            input = Some(i);
            y = second.as_deref();
        }
        Command::KsampleTest { input: i, h, plan } => {
            f = Fields::new("ksample-test");
            f.put("h", Some(*h)).plan(plan);
            input = Some(i);
        }
        Command::UniformityTest { input: i, rho, replicates, quantile } => {
            f = Fields::new("uniformity-test");
            f.put("rho", Some(*rho)).put("replicates", *replicates).put("quantile", *quantile);
            input = Some(i);
        }
        Command::SelectH { input: i, alternative, deltas, h_grid, n_runs, plan } => {
            f = Fields::new("select-h");
            f.put("alternative", Some(alternative.to_ascii_lowercase()))
                .put("deltas", deltas.clone().map(|d| d.0))
                .put("h_grid", h_grid.clone().map(|g| g.0))
                .put("n_runs", *n_runs)
                .plan(plan);
            input = Some(i);
        }
        Command::PkbdSample { n, rho, mu, method } => {
            f = Fields::new("pkbd-sample");
            f.put("n", Some(*n)).put("rho", Some(*rho)).put("mu", Some(mu.0.clone())).put("method", method.clone());
        }
        Command::PkbdDensity { input: i, rho, mu } => {
            f = Fields::new("pkbd-density");
            f.put("rho", Some(*rho)).put("mu", Some(mu.0.clone()));
            input = Some(i);
        }
        Command::Cluster { input: i, cluster } => {
            f = Fields::new("cluster");
            f.cluster(cluster);
            if cluster.k.is_none() {
                return Err(usage("cluster requires --k"));
            }
            input = Some(i);
        }
        Command::Validate { input: i, cluster, fits: stored, h, plan } => {
            f = Fields::new("validate");
            f.cluster(cluster).put("h", *h).plan(plan);
            if cluster.k.is_none() && stored.is_none() {
                return Err(usage("validate requires --k or --fits"));
            }
            input = Some(i);
            fits = stored.as_deref();
        }
        Command::Summary { input: i, cluster, fits: stored, num_clust } => {
            f = Fields::new("summary");
            f.cluster(cluster).put("num_clust", Some(*num_clust));
            input = Some(i);
            fits = stored.as_deref();
        }
    }
    let op: Operation = serde_json::from_value(Value::Object(f.0)).map_err(|e| usage(e.to_string()))?;
    Ok(Job { op, input, y, fits })
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn csv_options(i: &Input) -> Result<CsvOptions> {
    Ok(CsvOptions { delimiter: i.delim.parse()?, has_header: i.has_header })
}

fn parse(path: &Path, opts: CsvOptions) -> Result<Table> {
    Table::parse(&read(path)?, opts).with_context(|| format!("reading {}", path.display()))
}

fn load_inputs(job: &Job) -> Result<Inputs> {
    let mut inputs = Inputs::default();
    if let Some(i) = job.input {
        let opts = csv_options(i)?;
        let t = parse(&i.data, opts)?;
        match i.labels_col {
            Some(col) => {
                let (x, g) = t.split_labels(col)?;
                inputs.x = Some(x);
                inputs.labels = Some(g);
            }
            None => inputs.x = Some(t.to_matrix()?),
        }
        if let Some(l) = &i.labels {
            inputs.labels = Some(parse(l, opts)?.labels()?);
        }
        if let Some(y) = job.y {
            inputs.y = Some(parse(y, opts)?.to_matrix()?);
        }
    }
    if let Some(p) = job.fits {
        inputs.fits = Some(stored_fits(p, &job.op)?);
    }
    Ok(inputs)
}

fn stored_fits(path: &Path, op: &Operation) -> Result<Vec<MixtureFit>> {
    let text = String::from_utf8(read(path)?).map_err(|_| usage(format!("{} is not UTF-8", path.display())))?;
    let env = Envelope::from_json(&text).with_context(|| format!("reading fits from {}", path.display()))?;
    let Output::Clustering(c) = env.result else {
        return Err(usage(format!("{} is not the output of `cluster`", path.display())));
    };
    let normalize = match op {
        Operation::Validate(r) => r.cluster.normalize,
        Operation::Summary(r) => r.cluster.normalize,
        _ => true,
    };
    if c.normalized != normalize {
        return Err(usage("--no-normalize must match the run that produced --fits"));
    }
    Ok(c.fits)
}

/// Operation parameters without the tag, as the service expects them.
fn params(op: &Operation) -> Value {
    let mut v = serde_json::to_value(op).expect("requests serialize");
    v.as_object_mut().expect("tagged object").remove("operation");
    v
}

async fn remote(url: &str, job: &Job<'_>, seed: u64) -> Result<Envelope> {
    let client = Client::new(url);
    let mut data = DataRef::default();
    if let Some(i) = job.input {
        let opts = csv_options(i)?;
        let name = i.data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        data.dataset_id = Some(client.upload(&name, read(&i.data)?, opts).await?.dataset_id);
        data.labels_col = i.labels_col;
        if let Some(l) = &i.labels {
            data.labels = Some(parse(l, opts)?.labels()?.labels().to_vec());
        }
        if let Some(y) = job.y {
            data.y_dataset_id = Some(client.upload("y", read(y)?, opts).await?.dataset_id);
        }
    }
    let req = |p: Value| ServiceRequest { data: data.clone(), seed: Some(seed), params: p };
    match &job.op {
        Operation::SelectH(_) | Operation::Cluster(_) => {
            let path = route(&job.op).expect("job route");
            let done = client.run_job(path, &req(params(&job.op))).await?;
            done.result.context("finished job carries no result")
        }
        // Fitting runs on the server; validation and summaries of the
        // returned fits are computed here, as the fits fully determine them.
        Operation::Validate(_) | Operation::Summary(_) => {
            let mut inputs = load_inputs(job)?;
            if inputs.fits.is_none() {
                let mut fit_req = match &job.op {
                    Operation::Validate(r) => r.cluster.clone(),
                    Operation::Summary(r) => r.cluster.clone(),
                    _ => unreachable!(),
                };
                if let Operation::Summary(r) = &job.op {
                    if fit_req.k.is_empty() {
                        fit_req.k = vec![r.num_clust];
                    }
                }
                let fit_op = Operation::Cluster(fit_req);
                let done = client.run_job(route(&fit_op).expect("job route"), &req(params(&fit_op))).await?;
                match done.result.map(|e| e.result) {
                    Some(Output::Clustering(c)) => inputs.fits = Some(c.fits),
                    _ => anyhow::bail!("clustering job returned no fits"),
                }
            }
            Ok(quadratik_api::run(&job.op, &inputs, seed, None)?)
        }
        op => Ok(client.run(route(op).expect("sync route"), &req(params(op))).await?),
    }
}

fn emit(cli: &Cli, env: &Envelope) -> Result<()> {
    let tables = aux_tables(&env.result);
    let is_sample = matches!(env.request, Operation::PkbdSample(_));
    let format = cli.global.format.unwrap_or(if is_sample { Format::Csv } else { Format::Json });
    let text = match format {
        Format::Json => env.to_json(),
        // Bare rows, ready to be read back with --data.
        Format::Csv if is_sample => tables[0].rows.iter().map(|r| r.join(",") + "\n").collect(),
        Format::Csv => tables.first().map(|t| t.to_csv()).unwrap_or_default(),
    };
    match &cli.global.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes()).context("writing stdout")?,
    }
    if let Some(dir) = &cli.global.aux_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for t in &tables {
            let p: PathBuf = dir.join(format!("{}.csv", t.name));
            fs::write(&p, t.to_csv()).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.global.threads {
        quadratik_core::set_threads(t).map_err(|e| usage(e.to_string()))?;
    }
    let seed = cli.global.seed.unwrap_or(DEFAULT_SEED);
    let job = build(&cli.command)?;
    let env = match &cli.global.server {
        None => quadratik_api::run(&job.op, &load_inputs(&job)?, seed, None)?,
        Some(url) => tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .context("starting the async runtime")?
            .block_on(remote(url, &job, seed))?,
    };
    emit(cli, &env)
}
