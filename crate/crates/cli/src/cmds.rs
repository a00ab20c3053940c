//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use cosfl::codec::{count_better_intervals, interval_table, AngleBound};
use cosfl::nn::save_checkpoint;
use cosfl::packing::{byte_entropy, decode_packet, deflate, pack_bits, HEADER_LEN};
use cosfl::sim::{
    gradient_ablation, AblationMode, CompressionPipeline, CompressionScheme, FedConfig,
    RoundReport, Simulation,
};

use crate::tensor::{read_tensor, write_tensor};
use crate::{AblationArgs, AnalyzeArgs, CmdError, DequantizeArgs, InspectArgs, QuantizeArgs, RunArgs};

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<FedConfig, CmdError> {
    if !path.exists() {
        return Err(CmdError::usage(format!("config file not found: {}", path.display())));
    }
    let mut cfg = FedConfig::from_path(path).map_err(|e| CmdError::data(e.to_string()))?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
        cfg.sampling_seed = 0;
        cfg.mask_seed = 0;
        cfg.quantizer_seed = 0;
        cfg.normalize();
    }
    Ok(cfg)
}

fn verbose() -> bool {
    std::env::var("COSFL_VERBOSE").is_ok_and(|v| v != "0" && !v.is_empty())
}

pub fn run(args: RunArgs) -> Result<(), CmdError> {
    let cfg = load_config(&args.config, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    let mut sim = Simulation::new(cfg.clone())?;

    let mut csv = String::from("round,accuracy,loss,bytes,cumulative_bytes\n");
    let mut jsonl = String::new();
    let mut reports: Vec<RoundReport> = Vec::with_capacity(cfg.rounds);
    for t in 0..cfg.rounds {
        let report = sim.run_round(t)?;
        if verbose() {
            eprintln!(
                "round {:>4}: acc {:.4} loss {:.4} bytes {} ({} ms)",
                report.round, report.accuracy, report.loss, report.bytes_up, report.wall_ms
            );
        }
        csv.push_str(&format!(
            "{},{:.6},{:.6},{},{}\n",
            report.round, report.accuracy, report.loss, report.bytes_up, report.cumulative_bytes
        ));
        jsonl.push_str(&serde_json::to_string(&report).map_err(|e| CmdError::internal(e.to_string()))?);
        jsonl.push('\n');
        reports.push(report);
    }

    std::fs::write(args.out.join("reports.csv"), csv)?;
    std::fs::write(args.out.join("reports.jsonl"), jsonl)?;
    save_checkpoint(sim.model(), &args.out.join("model.bin")).map_err(|e| CmdError::data(e.to_string()))?;

    let final_acc = reports.last().map_or(0.0, |r| r.accuracy);
    let total = sim.ledger().total_bytes();
    println!("final_accuracy\t{final_acc:.6}");
    println!("total_uplink_bytes\t{total}");
    println!("float32_uplink_bytes\t{}", sim.ledger().total_float32_bytes());
    println!("compression_ratio\t{:.3}", sim.ledger().compression_ratio());
    Ok(())
}

pub fn analyze_intervals(args: AnalyzeArgs) -> Result<(), CmdError> {
    if args.bits == 0 || args.bits > 8 {
        return Err(CmdError::usage("bits must be in 1..=8"));
    }
    let bound = AngleBound::new(args.bound, 0.0)
        .map_err(|e| CmdError::usage(e.to_string()))?;
    let rows = interval_table(args.bits, &bound);
    let mut out = std::io::stdout().lock();
    writeln!(out, "k\tcosine_bound\tlinear_bound\tbetter")?;
    for r in &rows {
        writeln!(out, "{}\t{:.9}\t{:.9}\t{}", r.k, r.cosine_bound, r.linear_bound, u8::from(r.better))?;
    }
    let (count, fraction) = count_better_intervals(args.bits, &bound);
    writeln!(out, "count\t{count}")?;
    writeln!(out, "fraction\t{fraction:.4}")?;
    Ok(())
}

fn parse_scheme(s: &str) -> Result<CompressionScheme, CmdError> {
    Ok(match s {
        "float32" => CompressionScheme::Float32,
        "cosine" => CompressionScheme::Cosine,
        "linear" => CompressionScheme::Linear,
        "sign" => CompressionScheme::Sign,
        "sign_norm" => CompressionScheme::SignNorm,
        other => return Err(CmdError::usage(format!("unknown scheme `{other}`"))),
    })
}

pub fn quantize(args: QuantizeArgs) -> Result<(), CmdError> {
    let scheme = parse_scheme(&args.scheme)?;
    let values = read_tensor(&args.input)?;
    if values.is_empty() {
        return Err(CmdError::data("empty tensor"));
    }
    let raw_bytes = 4 * values.len();

    if matches!(scheme, CompressionScheme::Float32) {
        // No packet: report what DEFLATE alone does to the raw f32 bytes.
        let raw: Vec<u8> = values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        let z = deflate(&raw);
        println!("scheme\tfloat32");
        println!("n\t{}", values.len());
        println!("raw_bytes\t{raw_bytes}");
        println!("deflate_bytes\t{}", z.len());
        println!("deflate_ratio\t{:.4}", raw_bytes as f64 / z.len() as f64);
        println!("entropy_f32\t{:.4}", byte_entropy(&raw).map_err(|e| CmdError::data(e.to_string()))?);
        return Ok(());
    }

    let pipeline = CompressionPipeline {
        scheme,
        bits: args.bits,
        unbiased: args.unbiased,
        clip_fraction: args.clip,
        kept_fraction: args.kept as f32 as f64,
        hadamard: args.hadamard,
        bound_formula: cosfl::codec::BoundFormula::RangeSymmetric,
        mask_base_seed: 0,
        quantizer_base_seed: 0,
    };
    if pipeline.hadamard && !matches!(scheme, CompressionScheme::Linear) {
        return Err(CmdError::usage("--hadamard composes with --scheme linear only"));
    }
    let bytes = pipeline.encode_with_seeds(&values, args.mask_seed, args.seed, None)?;
    let (decoded, _) = pipeline.decode_layer(&bytes)?;

    let max_err = values
        .iter()
        .zip(&decoded)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let (q, _) = decode_packet(&bytes)?;
    let packed = pack_bits(&q.codes, q.bits).map_err(|e| CmdError::internal(e.to_string()))?;

    println!("scheme\t{}", args.scheme);
    println!("n\t{}", values.len());
    println!("bits\t{}", q.bits);
    println!("norm\t{:.6}", q.norm);
    println!("bound\t{:.6}", q.bound.b_theta);
    println!("max_error\t{max_err:.6e}");
    println!("payload_bytes_pre_deflate\t{}", packed.len());
    println!("packet_bytes\t{}", bytes.len());
    println!("float32_bytes\t{raw_bytes}");
    println!("overall_ratio\t{:.3}", raw_bytes as f64 / bytes.len() as f64);
    if !packed.is_empty() {
        println!("entropy_codes\t{:.4}", byte_entropy(&packed).map_err(|e| CmdError::data(e.to_string()))?);
    }

    if let Some(out) = &args.out {
        std::fs::write(out, &bytes)?;
    }
    Ok(())
}

pub fn dequantize(args: DequantizeArgs) -> Result<(), CmdError> {
    if !args.packet.exists() {
        return Err(CmdError::usage(format!("packet not found: {}", args.packet.display())));
    }
    let bytes = std::fs::read(&args.packet)?;
    let (q, _) = decode_packet(&bytes).map_err(|e| CmdError::data(e.to_string()))?;
    // The pipeline decode handles mask expansion and rotation inversion.
    let pipeline = CompressionPipeline {
        scheme: CompressionScheme::Cosine, // only the decode path is used
        bits: q.bits,
        unbiased: false,
        clip_fraction: 0.0,
        kept_fraction: 1.0,
        hadamard: false,
        bound_formula: cosfl::codec::BoundFormula::RangeSymmetric,
        mask_base_seed: 0,
        quantizer_base_seed: 0,
    };
    let (values, _) = pipeline.decode_layer(&bytes)?;
    write_tensor(&args.out, &values)?;
    println!("n\t{}", values.len());
    println!("wrote\t{}", args.out.display());
    Ok(())
}

pub fn inspect(args: InspectArgs) -> Result<(), CmdError> {
    if !args.packet.exists() {
        return Err(CmdError::usage(format!("packet not found: {}", args.packet.display())));
    }
    let bytes = std::fs::read(&args.packet)?;
    let (q, consumed) = decode_packet(&bytes).map_err(|e| CmdError::data(e.to_string()))?;
    println!("scheme\t{:?}", q.scheme);
    println!("bits\t{}", q.bits);
    println!("n\t{}", q.full_len);
    println!("codes\t{}", q.codes.len());
    println!("norm\t{:.6}", q.norm);
    println!("bound\t{:.6}", q.bound.b_theta);
    match q.mask {
        Some(m) => {
            println!("mask_seed\t{}", m.seed);
            println!("kept_fraction\t{:.6}", m.kept_fraction);
        }
        None => println!("mask\tnone"),
    }
    println!("hadamard\t{}", q.hadamard_seed.is_some());
    println!("header_bytes\t{HEADER_LEN}");
    println!("packet_bytes\t{consumed}");
    Ok(())
}

pub fn ablation(args: AblationArgs) -> Result<(), CmdError> {
    let cfg = load_config(&args.config, args.seed)?;
    let mode = AblationMode::parse(&args.mode)
        .ok_or_else(|| CmdError::usage(format!("unknown mode `{}`", args.mode)))?;
    let trace = gradient_ablation(&cfg, mode, args.fraction, args.sigma)?;
    let mut csv = String::from("epoch,accuracy,loss\n");
    for p in &trace {
        csv.push_str(&format!("{},{:.6},{:.6}\n", p.epoch, p.accuracy, p.loss));
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
