use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use spatial_entropy::diffusion::{entropy_noise_matching, make_linear_schedule, marginal_sample, mse};
use spatial_entropy::histograms::{hard_joint_pmf, hard_pmf_1d, shannon_entropy, spatial_entropy};
use spatial_entropy::kde::{kde_pmf_1d, windowed_joint_pmfs};
use spatial_entropy::losses::{evaluate, shuffle_averaged_loss};
use spatial_entropy::matching::{gradient_descent, MatchConfig};
use spatial_entropy::{ImageGrid, KdeJointConfig, LossKind, LossReport, NeighborWeights, Scope};

use crate::args::{describe_config, Cli, Command, OutputArgs, StatsArgs};
use crate::error::CliError;
use crate::io::{read_image, write_atomic, write_image, Image8};

/// Runs one parsed command, printing a summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Entropy { input, stats, output } => entropy(input, stats, output, out),
        Command::Kl {
            target,
            pred,
            stats,
            output,
        } => kl(target, pred, stats, output, out),
        Command::Match {
            target,
            init,
            stats,
            output,
            iters,
            lr,
            loss,
            out: image_path,
        } => run_match(target, init, stats, output, *iters, *lr, *loss, image_path, out),
        Command::NoiseDemo {
            steps,
            beta_start,
            beta_end,
            t,
            seed,
            size,
            json,
            csv,
        } => {
            let demo = NoiseDemo {
                steps: *steps,
                beta_start: *beta_start,
                beta_end: *beta_end,
                t: *t,
                seed: *seed,
                size: *size,
            };
            noise_demo(&demo, json.as_deref(), csv.as_deref(), out)
        }
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn window_csv(rows: &[((usize, usize), f64)], header: bool) -> String {
    let mut s = String::new();
    if header {
        s.push_str("origin_row,origin_col,value\n");
    }
    for ((r, c), v) in rows {
        s.push_str(&format!("{r},{c},{v}\n"));
    }
    s
}

fn load(path: &Path) -> Result<(Image8, ImageGrid), CliError> {
    let img = read_image(path)?;
    let grid = img.to_grid()?;
    Ok((img, grid))
}

fn entropy(input: &Path, stats: &StatsArgs, output: &OutputArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (img, grid) = load(input)?;
    let cfg = stats.kde_config(img.maxval as f64)?;
    let mut channels = Vec::new();
    let mut window_sums: Option<Vec<((usize, usize), f64)>> = None;
    for c in 0..grid.channels() {
        let plane = grid.channel(c);
        let hard_1d = shannon_entropy(&hard_pmf_1d(&plane, &cfg.bins)?);
        let hard_spatial = spatial_entropy(&hard_joint_pmf(&plane, &NeighborWeights::uniform(), &cfg.bins)?);
        let kde_1d = shannon_entropy(&kde_pmf_1d(&plane, &cfg.kernel1, &cfg.bins, true)?);
        let windows: Vec<((usize, usize), f64)> = windowed_joint_pmfs(&plane, &cfg)?
            .into_iter()
            .map(|(origin, pmf)| (origin, spatial_entropy(&pmf)))
            .collect();
        let kde_spatial = windows.iter().map(|(_, v)| v).sum::<f64>() / windows.len() as f64;
        match &mut window_sums {
            None => window_sums = Some(windows),
            Some(acc) => acc.iter_mut().zip(&windows).for_each(|(a, (_, v))| a.1 += v),
        }
        writeln!(
            out,
            "channel {c}: entropy {hard_1d:.6} spatial_entropy {hard_spatial:.6} kde_entropy {kde_1d:.6} kde_spatial_entropy {kde_spatial:.6}"
        )
        .map_err(stdout_err)?;
        channels.push(json!({
            "channel": c,
            "entropy": hard_1d,
            "spatial_entropy": hard_spatial,
            "kde_entropy": kde_1d,
            "kde_spatial_entropy": kde_spatial,
        }));
    }
    let mut windows = window_sums.unwrap_or_default();
    windows.iter_mut().for_each(|(_, v)| *v /= grid.channels() as f64);

    if let Some(path) = &output.json {
        let report = json!({
            "command": "entropy",
            "input": input.display().to_string(),
            "height": grid.height(),
            "width": grid.width(),
            "channels": channels,
            "flags": stats.echo(),
            "config": describe_config(&cfg),
        });
        write_json(path, &report)?;
    }
    if let Some(path) = &output.csv {
        write_atomic(path, window_csv(&windows, output.header).as_bytes())?;
    }
    Ok(())
}

fn loss_value(
    kind: LossKind,
    target: &ImageGrid,
    pred: &ImageGrid,
    cfg: &KdeJointConfig,
    stats: &StatsArgs,
) -> Result<LossReport, CliError> {
    Ok(if stats.shuffles > 0 {
        shuffle_averaged_loss(target, pred, cfg, stats.shuffles, stats.seed, kind, stats.eps, false)?
    } else {
        evaluate(kind, target, pred, cfg, stats.eps, false)?
    })
}

fn kl(target: &Path, pred: &Path, stats: &StatsArgs, output: &OutputArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (t_img, t) = load(target)?;
    let (_, p) = load(pred)?;
    let cfg = stats.kde_config(t_img.maxval as f64)?;
    let global_cfg = cfg.clone().with_scope(Scope::Global);

    let mut metrics = serde_json::Map::new();
    let mut kl_windows = None;
    for kind in [LossKind::Kl, LossKind::CrossEntropy, LossKind::Hellinger] {
        let global = loss_value(kind, &t, &p, &global_cfg, stats)?.value;
        let windowed = if stats.global {
            None
        } else {
            let report = loss_value(kind, &t, &p, &cfg, stats)?;
            if kind == LossKind::Kl {
                kl_windows = report.per_window.clone();
            }
            Some(report.value)
        };
        match windowed {
            Some(w) => writeln!(out, "{} global {global:.9} windowed {w:.9}", kind.name()),
            None => writeln!(out, "{} global {global:.9}", kind.name()),
        }
        .map_err(stdout_err)?;
        metrics.insert(kind.name().to_string(), json!({ "global": global, "windowed": windowed }));
    }

    if let Some(path) = &output.json {
        let report = json!({
            "command": "kl",
            "target": target.display().to_string(),
            "pred": pred.display().to_string(),
            "metrics": metrics,
            "per_window_kl": kl_windows.as_ref().map(|w| w.iter().map(|((r, c), v)| json!([r, c, v])).collect::<Vec<_>>()),
            "flags": stats.echo(),
            "config": describe_config(&cfg),
        });
        write_json(path, &report)?;
    }
    if let Some(path) = &output.csv {
        let rows = kl_windows.ok_or_else(|| CliError::Usage("--csv needs windowed statistics; drop --global".into()))?;
        write_atomic(path, window_csv(&rows, output.header).as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_match(
    target: &Path,
    init: &Path,
    stats: &StatsArgs,
    output: &OutputArgs,
    iters: usize,
    lr: f64,
    loss: LossKind,
    image_path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    if !(lr > 0.0) {
        return Err(CliError::Usage(format!("--lr must be positive, got {lr}")));
    }
    let (t_img, t) = load(target)?;
    let (_, x0) = load(init)?;
    let cfg = MatchConfig {
        loss,
        shuffles: stats.shuffles,
        seed: stats.seed,
        eps: stats.eps,
        ..MatchConfig::new(stats.kde_config(t_img.maxval as f64)?, iters, lr)
    };
    let outcome = gradient_descent(&t, &x0, &cfg)?;
    write_image(image_path, &Image8::from_grid(&outcome.image))?;

    let (first, last) = (outcome.losses[0], outcome.losses[iters]);
    writeln!(out, "{} initial {first:.9} final {last:.9}", loss.name()).map_err(stdout_err)?;

    if let Some(path) = &output.csv {
        let mut s = String::new();
        if output.header {
            s.push_str("iter,loss\n");
        }
        for (k, v) in outcome.losses.iter().enumerate() {
            s.push_str(&format!("{k},{v}\n"));
        }
        write_atomic(path, s.as_bytes())?;
    }
    if let Some(path) = &output.json {
        let report = json!({
            "command": "match",
            "target": target.display().to_string(),
            "init": init.display().to_string(),
            "out": image_path.display().to_string(),
            "iters": iters,
            "lr": lr,
            "loss": loss.name(),
            "initial_loss": first,
            "final_loss": last,
            "flags": stats.echo(),
            "config": describe_config(&cfg.kde),
        });
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct NoiseDemo {
    steps: usize,
    beta_start: f64,
    beta_end: f64,
    t: usize,
    seed: u64,
    size: usize,
}

/// Checkerboard of 8x8 cells alternating between -1 and 1.
fn checkerboard(size: usize) -> Result<ImageGrid, CliError> {
    Ok(ImageGrid::from_fn(size, size, (-4.0, 4.0), |r, c| {
        if (r / 8 + c / 8) % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    })?)
}

fn noise_demo(demo: &NoiseDemo, json_path: Option<&Path>, csv_path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let schedule = make_linear_schedule(demo.steps, demo.beta_start, demo.beta_end)?;
    let x0 = checkerboard(demo.size)?;
    let (_, noise) = marginal_sample(&x0, demo.t, &schedule, demo.seed)?;
    let cfg = KdeJointConfig::noise();
    let preds = [
        ("true_noise", noise.clone()),
        ("scaled_noise_0.9", noise.map(|z| 0.9 * z)?),
        ("zero", noise.map(|_| 0.0)?),
    ];
    let mut table = String::from("pred,entropy_loss,mse\n");
    let mut rows = Vec::new();
    for (name, pred) in &preds {
        let entropy_loss = entropy_noise_matching(pred, &noise, &cfg)?.value;
        let err = mse(pred, &noise)?;
        table.push_str(&format!("{name},{entropy_loss},{err}\n"));
        rows.push(json!({ "pred": name, "entropy_loss": entropy_loss, "mse": err }));
    }
    out.write_all(table.as_bytes()).map_err(stdout_err)?;
    if let Some(path) = csv_path {
        write_atomic(path, table.as_bytes())?;
    }
    if let Some(path) = json_path {
        let report = json!({
            "command": "noise-demo",
            "flags": {
                "steps": demo.steps,
                "beta_start": demo.beta_start,
                "beta_end": demo.beta_end,
                "t": demo.t,
                "seed": demo.seed,
                "size": demo.size,
            },
            "alpha_bar": schedule.alpha_bar(demo.t)?,
            "config": describe_config(&cfg),
            "rows": rows,
        });
        write_json(path, &report)?;
    }
    Ok(())
}
