use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hicomp::config::{ModelKind, RunConfig};
use hicomp::data::{
    cauchy_model_generate, encode_text, hmm_generate, CauchyModelSpec, CauchyModelTruth, Dataset, HmmSpec, RawTable,
};
use hicomp::grouping::Grouping;
use hicomp::mcmc::{read_chain, run_chain_with, write_chain_header, write_chain_record, ChainHeader, CompressedModel};
use hicomp::predict::{autocorrelation, format_predictions, predict_all};
use hicomp::prior::Family;
use hicomp::split::{cauchy_split_cdf, cauchy_split_pdf, split_sample, SplitQuery};
use hicomp::{Error, Result, VERSION};

#[derive(Parser)]
#[command(name = "hicomp", version, about = "Bayesian logistic models with compressed high-order interactions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample sequences from the 8-state hidden Markov model
    GenerateHmm(GenerateHmmArgs),
    /// Sample classification data from a random Cauchy-coefficient model
    GenerateCauchy(GenerateCauchyArgs),
    /// Turn English text into 3-symbol sequence windows
    EncodeText(EncodeTextArgs),
    /// Group patterns by expression and report the superpatterns
    Group(GroupArgs),
    /// Run the Gibbs sampler and write a chain file
    Train(TrainArgs),
    /// Predict test cases from a chain
    Predict(PredictArgs),
    /// Print CDF and density tables of a splitting distribution
    SplitCheck(SplitCheckArgs),
    /// Autocorrelation of the width hyperparameters in a chain
    Diagnose(DiagnoseArgs),
}

/// `a:b`, 1-based and inclusive.
fn parse_rows(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `first:last`, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad row `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad row `{b}`"))?;
    if a == 0 || b < a {
        return Err(format!("row range `{s}` must satisfy 1 <= first <= last"));
    }
    Ok(a - 1..b)
}

#[derive(Args, Serialize)]
struct GenerateHmmArgs {
    #[arg(long, default_value_t = 5500)]
    sequences: usize,
    /// Symbols per sequence; the last one is the response
    #[arg(long, default_value_t = 21)]
    length: usize,
    #[arg(long, default_value_t = 0.95)]
    dominant: f64,
    #[arg(long, default_value_t = 0.95)]
    emission: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GenerateCauchyArgs {
    #[arg(long, default_value_t = 7)]
    features: usize,
    /// Values per feature
    #[arg(long, default_value_t = 3)]
    values: u32,
    #[arg(long, default_value_t = 2)]
    classes: u32,
    /// Highest order with nonzero coefficients
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 5500)]
    cases: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generating coefficients here
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EncodeTextArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    order: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GroupArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    order: Option<usize>,
    /// Rows to use, `first:last` (1-based, inclusive)
    #[arg(long, value_parser = parse_rows)]
    #[serde(skip)]
    rows: Option<Range<usize>>,
    /// Defaults to standard output
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = parse_rows)]
    rows: Option<Range<usize>>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    sigma_sweeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output chain file
    #[arg(long)]
    chain: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, value_parser = parse_rows)]
    train_rows: Option<Range<usize>>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_parser = parse_rows)]
    test_rows: Option<Range<usize>>,
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run on a single thread
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SplitCheckArgs {
    #[arg(long, default_value = "cauchy")]
    family: Family,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long)]
    sigma1: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Number of split draws to summarize
    #[arg(long, default_value_t = 0)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DiagnoseArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Header comment lines identifying how an output was made.
struct Provenance {
    lines: Vec<String>,
}

impl Provenance {
    fn new(command: &str, seed: Option<u64>) -> Self {
        let mut lines = vec![format!("# hicomp {VERSION} {command}")];
        if let Some(s) = seed {
            lines.push(format!("# seed {s}"));
        }
        Provenance { lines }
    }

    fn input(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.lines.push(format!("# input {label} {} sha256 {hex}", path.display()));
        Ok(())
    }

    fn header(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn config_echo_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.toml");
    PathBuf::from(name)
}

fn echo_config<T: Serialize>(out: &Path, prov: &Provenance, value: &T) -> Result<()> {
    let body = toml::to_string(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(config_echo_path(out), format!("{}{body}", prov.header()))?;
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_dataset(path: &Path, kind: ModelKind, order: Option<usize>, rows: Option<Range<usize>>) -> Result<Dataset> {
    let raw = RawTable::read(path)?;
    let data = Dataset::from_table(&raw, kind, order)?;
    match rows {
        Some(r) => data.select(r),
        None => Ok(data),
    }
}

fn required(value: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    value.ok_or_else(|| Error::Config(format!("no {what} given (flag or [paths] in config)")))
}

fn generate_hmm(a: GenerateHmmArgs) -> Result<()> {
    let spec = HmmSpec {
        dominant_prob: a.dominant,
        emission_prob: a.emission,
        ..HmmSpec::default()
    };
    let data = hmm_generate(&spec, a.sequences, a.length, a.seed)?;
    let prov = Provenance::new("generate-hmm", Some(a.seed));
    fs::write(&a.out, format!("{}{}", prov.header(), data.to_text()))?;
    echo_config(&a.out, &prov, &a)
}

fn format_truth(truth: &CauchyModelTruth) -> String {
    let mut keys: Vec<&Vec<u32>> = truth.coefficients.keys().collect();
    keys.sort_by(|x, y| {
        let ox = x.iter().filter(|&&v| v != 0).count();
        let oy = y.iter().filter(|&&v| v != 0).count();
        ox.cmp(&oy).then_with(|| x.cmp(y))
    });
    let mut out = String::from("# pattern (0 = free) : coefficient per class\n");
    for k in keys {
        let pat: Vec<String> = k.iter().map(u32::to_string).collect();
        let beta: Vec<String> = truth.coefficients[k].iter().map(f64::to_string).collect();
        out.push_str(&format!("{} : {}\n", pat.join(" "), beta.join(" ")));
    }
    out
}

fn generate_cauchy(a: GenerateCauchyArgs) -> Result<()> {
    let spec = CauchyModelSpec {
        n_features: a.features,
        feature_size: a.values,
        n_classes: a.classes,
        order: a.order,
        n_cases: a.cases,
    };
    let (data, truth) = cauchy_model_generate(&spec, a.seed)?;
    let prov = Provenance::new("generate-cauchy", Some(a.seed));
    fs::write(&a.out, format!("{}{}", prov.header(), data.to_text()))?;
    if let Some(t) = &a.truth {
        fs::write(t, format!("{}{}", prov.header(), format_truth(&truth)))?;
    }
    echo_config(&a.out, &prov, &a)
}

fn encode_text_cmd(a: EncodeTextArgs) -> Result<()> {
    let text = fs::read_to_string(&a.input)?;
    let data = encode_text(&text, a.order)?;
    let mut prov = Provenance::new("encode-text", None);
    prov.input("text", &a.input)?;
    fs::write(&a.out, format!("{}{}", prov.header(), data.to_text()))?;
    echo_config(&a.out, &prov, &a)
}

fn group(a: GroupArgs) -> Result<()> {
    let data = load_dataset(&a.data, a.model, a.order, a.rows.clone())?;
    let grouping = Grouping::build(&data);
    let mut prov = Provenance::new("group", None);
    prov.input("data", &a.data)?;
    let text = format!("{}{}", prov.header(), grouping.report());
    write_output(a.report.as_deref(), &text)?;
    if let Some(r) = &a.report {
        echo_config(r, &prov, &a)?;
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if a.order.is_some() {
        cfg.order = a.order;
    }
    if let Some(v) = a.family {
        cfg.prior.family = v;
    }
    if let Some(v) = a.iterations {
        cfg.train.iterations = v;
    }
    if let Some(v) = a.burn_in {
        cfg.train.burn_in = v;
    }
    if let Some(v) = a.thin {
        cfg.train.thin = v;
    }
    if let Some(v) = a.sigma_sweeps {
        cfg.train.sigma_sweeps = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.chain.is_some() {
        cfg.paths.chain = a.chain;
    }
    cfg.validate()?;
    let data_path = required(cfg.paths.data.clone(), "training data")?;
    let chain_path = required(cfg.paths.chain.clone(), "chain output path")?;

    let data = load_dataset(&data_path, cfg.model, cfg.order, a.rows)?;
    cfg.order = Some(data.order());
    let prior = cfg.prior_spec(data.order())?;
    let grouping = Grouping::build(&data);
    let model = CompressedModel::new(&grouping, &data, cfg.prior.family)?;

    let mut prov = Provenance::new("train", Some(cfg.seed));
    prov.input("data", &data_path)?;
    let mut w = BufWriter::new(File::create(&chain_path)?);
    w.write_all(prov.header().as_bytes())?;
    let header = ChainHeader {
        n_groups: model.n_groups(),
        n_classes: model.n_classes,
        order: model.order,
        family: model.family,
    };
    write_chain_header(&mut w, &header)?;
    let samples = run_chain_with(&model, &prior, &cfg.schedule(), cfg.seed, |s| write_chain_record(&mut w, s))?;
    w.flush()?;
    eprintln!(
        "{} cases, {} groups, {} samples written to {}",
        data.n_cases(),
        model.n_groups(),
        samples.len(),
        chain_path.display()
    );
    echo_config(&chain_path, &prov, &cfg)
}

fn predict(a: PredictArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if a.order.is_some() {
        cfg.order = a.order;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.serial {
        cfg.predict.parallel = false;
    }
    if a.train.is_some() {
        cfg.paths.train = a.train;
    }
    if a.test.is_some() {
        cfg.paths.test = a.test;
    }
    if a.chain.is_some() {
        cfg.paths.chain = a.chain;
    }
    if a.out.is_some() {
        cfg.paths.output = a.out;
    }
    let train_path = required(cfg.paths.train.clone().or(cfg.paths.data.clone()), "training data")?;
    let test_path = required(cfg.paths.test.clone(), "test data")?;
    let chain_path = required(cfg.paths.chain.clone(), "chain file")?;
    let out_path = required(cfg.paths.output.clone(), "output path")?;

    let (header, chain) = read_chain(BufReader::new(File::open(&chain_path)?))?;
    let order = cfg.order.unwrap_or(header.order);
    if order != header.order {
        return Err(Error::Config(format!(
            "order {order} does not match the chain's order {}",
            header.order
        )));
    }
    cfg.order = Some(order);
    cfg.prior.family = header.family;

    let train = load_dataset(&train_path, cfg.model, Some(order), a.train_rows)?;
    let grouping = Grouping::build(&train);
    if grouping.n_groups() != header.n_groups || train.n_classes() as usize != header.n_classes {
        return Err(Error::ChainFormat(format!(
            "chain has {} groups and {} classes but the training data give {} and {}",
            header.n_groups,
            header.n_classes,
            grouping.n_groups(),
            train.n_classes()
        )));
    }
    let test = load_dataset(&test_path, cfg.model, Some(order), a.test_rows)?;
    if test.predictors(0).len() != train.predictors(0).len() || test.n_classes() != train.n_classes() {
        return Err(Error::InvalidDataset("test data do not have the training data's shape".into()));
    }

    let records = predict_all(&grouping, &chain, header.family, &test, cfg.seed, cfg.predict.parallel)?;
    let mut prov = Provenance::new("predict", Some(cfg.seed));
    prov.input("train", &train_path)?;
    prov.input("test", &test_path)?;
    prov.input("chain", &chain_path)?;
    fs::write(&out_path, format!("{}{}", prov.header(), format_predictions(&records)))?;
    echo_config(&out_path, &prov, &cfg)
}

fn split_check(a: SplitCheckArgs) -> Result<()> {
    let q = SplitQuery::new(a.s, a.sigma1, a.sigma2, a.family)?;
    if a.sigma1 == 0.0 || a.sigma2 == 0.0 {
        return Err(Error::Config("both widths must be positive".into()));
    }
    let spread = 5.0 * (a.sigma1 + a.sigma2);
    let from = a.from.unwrap_or(a.s.min(0.0) - spread);
    let to = a.to.unwrap_or(a.s.max(0.0) + spread);
    if a.points < 2 || !(to > from) {
        return Err(Error::Config("need at least 2 points and from < to".into()));
    }
    let mut text = Provenance::new("split-check", Some(a.seed)).header();
    text.push_str(&format!(
        "# family {} s {} sigma1 {} sigma2 {}\n",
        a.family, a.s, a.sigma1, a.sigma2
    ));
    text.push_str("# x pdf cdf\n");
    let v1 = a.sigma1 * a.sigma1;
    let v2 = a.sigma2 * a.sigma2;
    for i in 0..a.points {
        let x = from + (to - from) * i as f64 / (a.points - 1) as f64;
        let (pdf, cdf) = match a.family {
            Family::Cauchy => (cauchy_split_pdf(x, &q), cauchy_split_cdf(x, &q)),
            Family::Gaussian => {
                let mean = a.s * v1 / (v1 + v2);
                let sd = (v1 * v2 / (v1 + v2)).sqrt();
                let z = (x - mean) / sd;
                (
                    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()),
                    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2),
                )
            }
        };
        text.push_str(&format!("{x} {pdf} {cdf}\n"));
    }
    if a.draws > 0 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
        let mut draws = Vec::with_capacity(a.draws);
        for _ in 0..a.draws {
            draws.push(split_sample(&q, &mut rng)?);
        }
        draws.sort_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        let q25 = draws[draws.len() / 4];
        let q75 = draws[3 * draws.len() / 4];
        text.push_str(&format!("# draws {} q25 {q25} median {median} q75 {q75}\n", a.draws));
    }
    write_output(a.out.as_deref(), &text)
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let (header, chain) = read_chain(BufReader::new(File::open(&a.chain)?))?;
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut prov = Provenance::new("diagnose", None);
    prov.input("chain", &a.chain)?;
    let mut text = prov.header();
    let mut columns = Vec::new();
    for o in 1..=header.order {
        let series: Vec<f64> = chain.iter().map(|c| c.state.sigma.get(o)).collect();
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        text.push_str(&format!("# sigma_{o} mean {mean}\n"));
        columns.push(autocorrelation(&series, a.max_lag).ok());
    }
    let names: Vec<String> = (1..=header.order).map(|o| format!("acf_sigma_{o}")).collect();
    text.push_str(&format!("# lag {}\n", names.join(" ")));
    for lag in 0..=a.max_lag {
        let vals: Vec<String> = columns
            .iter()
            .map(|c| c.as_ref().map_or_else(|| "undefined".to_string(), |v| v[lag].to_string()))
            .collect();
        text.push_str(&format!("{lag} {}\n", vals.join(" ")));
    }
    write_output(a.out.as_deref(), &text)?;
    if let Some(o) = &a.out {
        echo_config(o, &prov, &a)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateHmm(a) => generate_hmm(a),
        Command::GenerateCauchy(a) => generate_cauchy(a),
        Command::EncodeText(a) => encode_text_cmd(a),
        Command::Group(a) => group(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::SplitCheck(a) => split_check(a),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
