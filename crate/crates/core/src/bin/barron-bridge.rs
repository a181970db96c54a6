use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use barron_bridge::convert::{convert, ConvertOptions};
use barron_bridge::io::{self, parse_activation};
use barron_bridge::poly::{build_pairs, poly_to_repu, BasisScale, Polynomial};
use barron_bridge::pushforward::EmbeddingCertificate;
use barron_bridge::spectral::{spectral_to_repu, SpectralRep};
use barron_bridge::verify::{check_certificate, convergence_study, sup_error, Sampler};
use barron_bridge::{Error, QuadratureSpec, Result, Rule, ShallowNet};

/// Default relative tolerance of certificate checks on quadrature paths.
const QUAD_TOL: f64 = 0.05;
/// Default relative tolerance of certificate checks on exact paths.
const EXACT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "barron-bridge", version, about = "Convert shallow networks between activations with Barron-norm certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// midpoint | trapezoid | gauss-legendre
    #[arg(long, default_value = "gauss-legendre")]
    quad_rule: Rule,
    #[arg(long, default_value_t = 256)]
    quad_nodes: usize,
    /// lattice | compact[:ratio] | classic
    #[arg(long, default_value = "lattice")]
    scale: BasisScale,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec::new(self.quad_rule, self.quad_nodes)
    }
}

#[derive(Args, Clone)]
struct ConvertArgs {
    /// Source net (JSON)
    #[arg(long)]
    from: PathBuf,
    /// Target activation: relu, repuS, tanh, softplus, ...
    #[arg(long)]
    to: String,
    #[command(flatten)]
    quad: QuadArgs,
    /// Taylor expansion point, or "auto" for the grid argmin of the constant
    #[arg(long, default_value = "auto")]
    expansion_point: String,
    /// Radius bounding every atom reach (smooth -> repuS, S >= 2)
    #[arg(long)]
    radius: Option<f64>,
    /// Shift for derivative -> antiderivative conversions
    #[arg(long)]
    h: Option<f64>,
    /// Substitution measure on R^2 (JSON {"d":1,"atoms":[...]})
    #[arg(long)]
    gamma: Option<PathBuf>,
    /// Skip the pointwise check of --gamma
    #[arg(long)]
    no_gamma_check: bool,
}

impl ConvertArgs {
    fn options(&self, nodes: Option<usize>) -> Result<ConvertOptions> {
        let mut quad = self.quad.spec();
        if let Some(n) = nodes {
            quad.nodes = n;
        }
        let expansion_point = match self.expansion_point.as_str() {
            "auto" => None,
            s => Some(s.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("--expansion-point must be a number or 'auto', got '{s}'"))
            })?),
        };
        Ok(ConvertOptions {
            quad,
            expansion_point,
            radius: self.radius,
            h: self.h,
            gamma: self.gamma.as_ref().map(io::read_measure).transpose()?,
            check_gamma: !self.no_gamma_check,
            scale: self.quad.scale,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Convert a net to another activation and certify the norms
    Convert {
        #[command(flatten)]
        args: ConvertArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        /// Relative certificate tolerance (default 1e-9 exact, 0.05 quadrature)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Represent a polynomial exactly as a RePU(s) net
    Poly2repu {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "lattice")]
        scale: BasisScale,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile a finite spectral representation into a RePU(s) net
    Spectral2repu {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: u32,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Print the representation norm of a net
    Norm { net: PathBuf },
    /// Sup distance between two nets on [-1,1]^d
    Verify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// grid:N (per axis) | rand:M[:SEED]; default grid:1000 for d=1, rand:10000:SEED otherwise
        #[arg(long)]
        sampler: Option<Sampler>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recheck a certificate against the emitted nets
    Check {
        #[arg(long)]
        cert: PathBuf,
        /// Source net (omit for spectral certificates)
        #[arg(long)]
        a: Option<PathBuf>,
        /// Target net
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the basis pairs and the condition number of W
    Basis {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "lattice")]
        scale: BasisScale,
    },
    /// Sup error of a conversion for increasing quadrature sizes
    Study {
        #[command(flatten)]
        args: ConvertArgs,
        /// Comma-separated increasing node counts
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 32, 128])]
        ns: Vec<usize>,
        #[arg(long)]
        sampler: Option<Sampler>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn sampler_for(d: usize, sampler: Option<Sampler>, seed: u64) -> Sampler {
    sampler.unwrap_or(match Sampler::default_for(d) {
        Sampler::Random { count, .. } => Sampler::Random { count, seed },
        s => s,
    })
}

fn print<T: serde::Serialize>(v: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v)?;
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(())
}

fn default_tol(cert: &EmbeddingCertificate) -> f64 {
    if cert.quadrature.is_none() {
        EXACT_TOL
    } else {
        QUAD_TOL
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Convert { args, out, cert, tol } => {
            let source = io::read_net(&args.from)?;
            let target = parse_activation(&args.to)?;
            let converted = convert(&source, &target, &args.options(None)?)?;
            io::write_net(&out, &converted.net)?;
            match &converted.certificate {
                Some(c) => {
                    io::write_json(&cert, c)?;
                    let check = check_certificate(c, Some(&source), &converted.net, tol.unwrap_or(default_tol(c)));
                    print(&json!({ "route": converted.route, "atoms": converted.net.measure.len(), "check": check }))?;
                    Ok(if check.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
                }
                None => {
                    let report = json!({
                        "route": converted.route,
                        "h": args.h,
                        "error_bound": converted.error_bound,
                        "notes": ["inclusion only: no norm inequality, sup-error bound (h/2) sup|D2| TV"],
                    });
                    io::write_json(&cert, &report)?;
                    print(&report)?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Cmd::Poly2repu { input, scale, out } => {
            let poly: Polynomial = io::read_json(&input)?;
            let pairs = build_pairs(poly.s, poly.d, scale)?;
            let res = poly_to_repu(&poly, &pairs)?;
            io::write_net(&out, &res.net)?;
            print(&json!({
                "atoms": res.net.measure.len(),
                "residual": res.residual,
                "condition": res.condition,
                "norm": res.net.representation_norm(),
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Spectral2repu { input, s, quad, out, cert } => {
            let rep: SpectralRep = io::read_json(&input)?;
            rep.validate()?;
            let pairs = build_pairs(s, rep.d, quad.scale)?;
            let (net, c) = spectral_to_repu(&rep, s, &pairs, &quad.spec())?;
            io::write_net(&out, &net)?;
            if let Some(path) = cert {
                io::write_json(&path, &c)?;
            }
            print(&json!({ "atoms": net.measure.len(), "certificate": c }))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Norm { net } => {
            print(&io::read_net(&net)?.representation_norm())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { a, b, sampler, seed } => {
            let (a, b) = (io::read_net(&a)?, io::read_net(&b)?);
            let sampler = sampler_for(a.d(), sampler, seed);
            let e = sup_error(&a, &b, sampler)?;
            print(&json!({ "sup_error": e, "sampler": sampler.to_string(), "points": sampler.len(a.d()) }))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check { cert, a, b, tol } => {
            let c: EmbeddingCertificate = io::read_json(&cert)?;
            let source: Option<ShallowNet> = a.map(io::read_net).transpose()?;
            let target = io::read_net(&b)?;
            if let Some(s) = &source {
                if s.d() != target.d() {
                    return Err(Error::DimensionMismatch { expected: s.d(), got: target.d() });
                }
            }
            let check = check_certificate(&c, source.as_ref(), &target, tol.unwrap_or(default_tol(&c)));
            print(&check)?;
            Ok(if check.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Basis { s, d, scale } => {
            print(&build_pairs(s, d, scale)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Study { args, ns, sampler, seed } => {
            let source = io::read_net(&args.from)?;
            let target = parse_activation(&args.to)?;
            let sampler = sampler_for(source.d(), sampler, seed);
            let mut opts = Vec::with_capacity(ns.len());
            for &n in &ns {
                opts.push((n, args.options(Some(n))?));
            }
            let table = convergence_study(
                &ns,
                |n| {
                    let o = &opts.iter().find(|(m, _)| *m == n).expect("listed").1;
                    Ok(convert(&source, &target, o)?.net)
                },
                &|x| source.evaluate(x).unwrap_or(f64::NAN),
                sampler,
            )?;
            print(&table)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
