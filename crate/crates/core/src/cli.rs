//! The `wd` command line: every computation behind a subcommand, JSON out.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adm::admissible_set;
use crate::census::{run_census, verify_census, CensusJson, CensusParams, StackContext};
use crate::deform::{filtration_lifts, gm_lift, rigidity_residual, rigidity_series, universal_deformation};
use crate::display::{display_make, Display, DisplayJson, DEFAULT_BUDGET};
use crate::matrix::{Arith, Mat};
use crate::pair::{pair_make, Coeff, Pair};
use crate::poly::StructurePolys;
use crate::ring::{make_ring, BaseRing, Ring, RingDescriptor};
use crate::witt::{WittRing, WittVector};
use crate::zink::{ArtinLocal, PDExtension, ZinkRing};
use crate::Error;

/// Entries of a matrix: rows of entries, each entry a list of component coordinates.
pub type MatJson = Vec<Vec<Vec<Vec<i64>>>>;

/// A display over W_m(R) or Ŵ_m(R), with its ring given in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplaySpec {
    pub ring: RingDescriptor,
    pub h: usize,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub basis: MatJson,
    pub psi: MatJson,
}

/// Input for `witt eval`: two vectors given by component coordinates.
#[derive(Debug, Clone, Deserialize)]
pub struct WittSpec {
    pub ring: RingDescriptor,
    pub n: usize,
    pub x: Vec<Vec<i64>>,
    pub y: Vec<Vec<i64>>,
}

#[derive(Parser)]
#[command(name = "wd", about = "Truncated Witt vectors, displays, censuses and admissible sets", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Witt vector arithmetic.
    #[command(subcommand)]
    Witt(WittCmd),
    /// Pairs and their M̃₁.
    #[command(subcommand)]
    Pair(PairCmd),
    /// Operations on truncated displays.
    #[command(subcommand)]
    Display(DisplayCmd),
    /// Isomorphism classes of truncated displays over finite fields.
    #[command(subcommand)]
    Census(CensusCmd),
    /// Lifting and deformations of Dieudonné displays.
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Admissible sets for GL_h.
    #[command(subcommand)]
    Adm(AdmCmd),
    /// Quick invariant checks for every module.
    Selftest(Output),
}

#[derive(Args, Clone)]
struct Output {
    /// Write JSON here and print a summary table instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Field {
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Degree of the residue field over F_p.
    #[arg(long, default_value_t = 1)]
    f: u32,
}

#[derive(Args, Clone)]
struct Shape {
    #[arg(long, default_value_t = 2)]
    h: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Args, Clone)]
struct Source {
    /// JSON input; without it the input is drawn from --seed.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum WittCmd {
    /// Sum, product, ghost map, Frobenius and Verschiebung of two vectors.
    Eval {
        #[command(flatten)]
        field: Field,
        /// Length of the Witt vectors.
        #[arg(long, default_value_t = 3)]
        precision: usize,
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Universal sum, product and Frobenius polynomials.
    Polys {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum PairCmd {
    /// Comparison and section maps of M̃₁ for a pair over W_m.
    Tilde {
        #[command(flatten)]
        field: Field,
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Clone)]
struct DisplayArgs {
    #[command(flatten)]
    field: Field,
    #[command(flatten)]
    shape: Shape,
    #[command(flatten)]
    src: Source,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand)]
enum DisplayCmd {
    /// The dual display.
    Dualize(DisplayArgs),
    /// Twist by the rank-one display presented through c with Ψ = iota.
    Twist {
        #[command(flatten)]
        args: DisplayArgs,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        c: i64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        iota: i64,
    },
    /// The Frobenius Φ and the valuation of its determinant.
    Frobenius(DisplayArgs),
}

#[derive(Args, Clone)]
struct CensusArgs {
    #[arg(long, default_value_t = 1)]
    h: usize,
    #[arg(long, default_value_t = 0)]
    d: usize,
    #[command(flatten)]
    field: Field,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    budget: Option<u128>,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand)]
enum CensusCmd {
    /// Enumerate classes, automorphism orders and the mass.
    Run(CensusArgs),
    /// Re-check a stored census.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        budget: Option<u128>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum DeformCmd {
    /// Every lift of a display over k to k[t]/t², one per filtration lift.
    Lift(DisplayArgs),
    /// The universal deformation at a finite order, with its first-order checks.
    Universal {
        #[command(flatten)]
        args: DisplayArgs,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Use (Z/p^a)[t]/m^(N+1) coefficients.
        #[arg(long)]
        mixed: Option<u32>,
    },
    /// The rigidity series for a random square-zero perturbation over k[t]/t².
    Rigidity {
        #[command(flatten)]
        field: Field,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 3)]
        precision: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum AdmCmd {
    /// Adm(μ_d) for GL_h with its Bruhat order.
    Enum {
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Emit Graphviz DOT instead of JSON.
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        out: Output,
    },
}

/// Failures before any computation starts count as usage errors.
enum Failure {
    Usage(String),
    Domain(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Run the CLI on argv (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: CheckFailed: {msg}");
            1
        }
    }
}

fn dispatch(cmd: Cmd) -> Outcome<()> {
    match cmd {
        Cmd::Witt(WittCmd::Eval { field, precision, src, out }) => witt_eval(&field, precision, &src, &out),
        Cmd::Witt(WittCmd::Polys { p, depth, out }) => {
            let polys = StructurePolys::generate(p, depth)?;
            let exp = polys.export();
            let table = ["sum", "prod", "frob"]
                .iter()
                .zip([&exp.sum, &exp.prod, &exp.frob])
                .map(|(name, t)| {
                    let counts: Vec<String> = t.iter().map(|poly| poly.len().to_string()).collect();
                    format!("{name}\tterms {}", counts.join(" "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            emit(&out, &exp, &table)
        }
        Cmd::Pair(PairCmd::Tilde { field, shape, src, out }) => pair_tilde(&field, &shape, &src, &out),
        Cmd::Display(DisplayCmd::Dualize(a)) => {
            let disp = load_display(&a, false)?;
            let dual = disp.dual()?;
            let spec = spec_of(&dual, &ring_desc(&a)?)?;
            let table = format!("dual of type ({}, {}) -> ({}, {})", disp.h(), disp.d(), dual.h(), dual.d());
            emit(&a.out, &Transformed { input: spec_of(&disp, &ring_desc(&a)?)?, output: spec }, &table)
        }
        Cmd::Display(DisplayCmd::Twist { args, c, iota }) => {
            let disp = load_display(&args, false)?;
            let big = disp.pair().ring().clone();
            let tw = disp.twist(&big.from_int(c), &disp.small().from_int(iota))?;
            let desc = ring_desc(&args)?;
            let table = format!("twist by c = {c}, iota = {iota}");
            emit(&args.out, &Transformed { input: spec_of(&disp, &desc)?, output: spec_of(&tw, &desc)? }, &table)
        }
        Cmd::Display(DisplayCmd::Frobenius(a)) => {
            let disp = load_display(&a, false)?;
            let phi = disp.frobenius_phi()?;
            let val = disp.phi_det_valuation()?;
            let out = FrobeniusOut {
                input: spec_of(&disp, &ring_desc(&a)?)?,
                phi: phi.to_json(disp.small().witt()),
                det_valuation: val,
            };
            let table = format!("Phi\n{}\nv(det Phi) = {val}", phi.fmt_with(disp.small().witt()));
            emit(&a.out, &out, &table)
        }
        Cmd::Census(CensusCmd::Run(a)) => {
            let params = CensusParams { h: a.h, d: a.d, p: a.field.p, f: a.field.f, m: a.m, n: a.n };
            let census = run_census(params, budget(a.budget)?)?;
            let ctx = StackContext::new(params)?;
            let json = census.to_json(&ctx);
            emit(&a.out, &json, &census_table(&json))
        }
        Cmd::Census(CensusCmd::Verify { input, budget: b, out }) => {
            let stored: CensusJson = read_json(&input)?;
            let v = verify_census(&stored, budget(b)?)?;
            let table = format!(
                "partition {}\norbit-stabilizer {}\nmass {}\nrecomputation {}",
                v.partition, v.orbit_stabilizer, v.mass, v.matches_recomputation
            );
            emit(&out, &v, &table)?;
            if v.passed() {
                Ok(())
            } else {
                Err(Failure::Check(format!("stored census {} does not verify", input.display())))
            }
        }
        Cmd::Deform(DeformCmd::Lift(a)) => deform_lift(&a),
        Cmd::Deform(DeformCmd::Universal { args, order, mixed }) => {
            let d0 = load_display(&args, true)?;
            let report = universal_deformation(&d0, order, mixed)?.report()?;
            let table = format!(
                "tangent dimension {}\nspecializations {}\nfiltration lifts {}\nbijective {}\nrigidity residual {}",
                report.tangent_dim,
                report.fiber_counts.specializations,
                report.fiber_counts.filtration_lifts,
                report.fiber_counts.bijective,
                report.rigidity_residual
            );
            emit(&args.out, &report, &table)
        }
        Cmd::Deform(DeformCmd::Rigidity { field, h, precision, seed, out }) => {
            deform_rigidity(&field, h, precision, seed, &out)
        }
        Cmd::Adm(AdmCmd::Enum { h, d, dot, out }) => {
            let adm = admissible_set(h, d)?;
            let mut table = format!("|Adm| = {}\nlength\tcount", adm.len());
            for (len, count) in adm.by_length() {
                table.push_str(&format!("\n{len}\t{count}"));
            }
            if dot {
                let text = adm.to_dot();
                match &out.out {
                    Some(path) => {
                        write_file(path, &text)?;
                        println!("{table}");
                    }
                    None => print!("{text}"),
                }
                Ok(())
            } else {
                emit(&out, &adm.to_json(), &table)
            }
        }
        Cmd::Selftest(out) => selftest(&out),
    }
}

/// WD_BUDGET wins over --budget, which wins over the default.
fn budget(flag: Option<u128>) -> Outcome<u128> {
    match std::env::var("WD_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("WD_BUDGET={v} is not a non-negative integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_BUDGET)),
    }
}

fn to_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// JSON to --out with the table on stdout, or JSON on stdout.
fn emit<T: Serialize>(out: &Output, value: &T, table: &str) -> Outcome<()> {
    let text = to_text(value);
    match &out.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("{table}");
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{} does not match the input schema: {e}", path.display())))
}

fn field_ring(f: &Field) -> Outcome<Ring> {
    Ok(if f.f == 1 { BaseRing::prime(f.p)? } else { BaseRing::galois(f.p, f.f)? })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mat_json(m: &Mat, w: &WittRing) -> MatJson {
    m.to_json(w)
        .into_iter()
        .map(|row| {
            row.into_iter().map(|e| e.into_iter().map(|c| c.into_iter().map(i64::from).collect()).collect()).collect()
        })
        .collect()
}

fn census_table(json: &CensusJson) -> String {
    let mut lines = vec!["class\tautOrder\torbitSize".to_string()];
    for (i, c) in json.classes.iter().enumerate() {
        lines.push(format!("{i}\t{}\t{}", c.aut_order, c.orbit_size));
    }
    lines.push(format!("classes {}  points {}  group {}", json.totals.classes, json.totals.points, json.totals.group));
    lines.push(format!("mass {} = {} : {}", json.mass_check.mass, json.mass_check.expected, json.mass_check.ok));
    lines.join("\n")
}

#[derive(Serialize)]
struct WittEvalOut {
    ring: RingDescriptor,
    n: usize,
    x: Vec<Vec<u32>>,
    y: Vec<Vec<u32>>,
    sum: Vec<Vec<u32>>,
    product: Vec<Vec<u32>>,
    ghost_x: Vec<Vec<u32>>,
    ghost_y: Vec<Vec<u32>>,
    /// σ(x) in W_{n−1}; absent at n = 1.
    frobenius_x: Option<Vec<Vec<u32>>>,
    verschiebung_x: Vec<Vec<u32>>,
}

fn witt_eval(field: &Field, precision: usize, src: &Source, out: &Output) -> Outcome<()> {
    let (w, x, y) = match &src.input {
        Some(path) => {
            let spec: WittSpec = read_json(path)?;
            let w = WittRing::new(make_ring(&spec.ring)?, spec.n)?;
            let (x, y) = (w.from_coords(&spec.x)?, w.from_coords(&spec.y)?);
            (w, x, y)
        }
        None => {
            let w = WittRing::new(field_ring(field)?, precision)?;
            let mut g = rng(src.seed);
            let (x, y) = (w.random(&mut g), w.random(&mut g));
            (w, x, y)
        }
    };
    let base = w.base().clone();
    let comps = |v: &WittVector| w.to_json(v).comps;
    let ghost = |v: &WittVector| w.ghost(v).iter().map(|c| base.coords(c)).collect::<Vec<_>>();
    let frobenius_x = if w.len() > 1 { Some(comps(&w.frobenius(&x, &w.with_len(w.len() - 1)?)?)) } else { None };
    let (s, pr) = (w.add(&x, &y), w.mul(&x, &y));
    let res = WittEvalOut {
        ring: base.descriptor(),
        n: w.len(),
        x: comps(&x),
        y: comps(&y),
        sum: comps(&s),
        product: comps(&pr),
        ghost_x: ghost(&x),
        ghost_y: ghost(&y),
        frobenius_x,
        verschiebung_x: comps(&w.verschiebung(&x)),
    };
    let table =
        format!("x\t{}\ny\t{}\nx + y\t{}\nx * y\t{}", w.fmt_elem(&x), w.fmt_elem(&y), w.fmt_elem(&s), w.fmt_elem(&pr));
    emit(out, &res, &table)
}

/// Input for `pair tilde`: a pair over W_m(R) and the level n of M̃₁.
#[derive(Debug, Clone, Deserialize)]
struct PairSpec {
    ring: RingDescriptor,
    h: usize,
    d: usize,
    m: usize,
    n: usize,
    basis: MatJson,
}

#[derive(Serialize)]
struct TildeOut {
    ring: RingDescriptor,
    h: usize,
    d: usize,
    m: usize,
    n: usize,
    basis: MatJson,
    comparison: MatJson,
    section: MatJson,
}

fn pair_tilde(field: &Field, shape: &Shape, src: &Source, out: &Output) -> Outcome<()> {
    let (desc, pair, n) = match &src.input {
        Some(path) => {
            let spec: PairSpec = read_json(path)?;
            let w = WittRing::new(make_ring(&spec.ring)?, spec.m)?;
            let basis = Mat::from_json(&w, &spec.basis)?;
            (spec.ring, pair_make(w, spec.h, spec.d, basis)?, spec.n)
        }
        None => {
            let k = field_ring(field)?;
            let w = WittRing::new(k.clone(), shape.m)?;
            let basis = Mat::random_invertible(&w, shape.h, &mut rng(src.seed));
            (k.descriptor(), pair_make(w, shape.h, shape.d, basis)?, shape.n)
        }
    };
    let tilde = pair.tilde(n)?;
    let small = tilde.ring.witt();
    let res = TildeOut {
        ring: desc,
        h: pair.h(),
        d: pair.d(),
        m: pair.ring().len(),
        n,
        basis: mat_json(pair.basis(), pair.ring().witt()),
        comparison: mat_json(&tilde.comparison, small),
        section: mat_json(&tilde.section, small),
    };
    let table = format!("comparison\n{}\nsection\n{}", tilde.comparison.fmt_with(small), tilde.section.fmt_with(small));
    emit(out, &res, &table)
}

#[derive(Serialize)]
struct Transformed {
    input: DisplaySpec,
    output: DisplaySpec,
}

#[derive(Serialize)]
struct FrobeniusOut {
    input: DisplaySpec,
    phi: Vec<Vec<Vec<Vec<u32>>>>,
    det_valuation: usize,
}

fn ring_desc(a: &DisplayArgs) -> Outcome<RingDescriptor> {
    match &a.src.input {
        Some(path) => Ok(read_json::<DisplaySpec>(path)?.ring),
        None => Ok(field_ring(&a.field)?.descriptor()),
    }
}

fn spec_of(d: &Display, ring: &RingDescriptor) -> Outcome<DisplaySpec> {
    Ok(DisplaySpec {
        ring: ring.clone(),
        h: d.h(),
        d: d.d(),
        m: d.m(),
        n: d.n(),
        basis: mat_json(d.pair().basis(), d.pair().ring().witt()),
        psi: mat_json(d.psi(), d.small().witt()),
    })
}

/// The display from --input, or a random one from --seed; over Ŵ when `zink`.
fn load_display(a: &DisplayArgs, zink: bool) -> Outcome<Display> {
    let (base, h, d, m, n, basis, psi) = match &a.src.input {
        Some(path) => {
            let s: DisplaySpec = read_json(path)?;
            (make_ring(&s.ring)?, s.h, s.d, s.m, s.n, Some(s.basis), Some(s.psi))
        }
        None => (field_ring(&a.field)?, a.shape.h, a.shape.d, a.shape.m, a.shape.n, None, None),
    };
    let coeff = if zink {
        Coeff::Zink(ZinkRing::new(ArtinLocal::new(base)?, m)?)
    } else {
        Coeff::Witt(WittRing::new(base, m)?)
    };
    let small = coeff.tilde_ring(n)?;
    let mut g = rng(a.src.seed);
    let basis = match basis {
        Some(b) => Mat::from_json(coeff.witt(), &b)?,
        None => Mat::random_invertible(&coeff, h, &mut g),
    };
    let psi = match psi {
        Some(p) => Mat::from_json(small.witt(), &p)?,
        None => Mat::random_invertible(&small, h, &mut g),
    };
    let pair: Pair = pair_make(coeff, h, d, basis)?;
    Ok(display_make(pair, n, psi)?)
}

#[derive(Serialize)]
struct LiftOut {
    special: DisplaySpec,
    extension: String,
    filtration_lifts: usize,
    expected: u128,
    lifts: Vec<DisplayJson>,
}

fn deform_lift(a: &DisplayArgs) -> Outcome<()> {
    let d0 = load_display(a, true)?;
    let k = d0.pair().ring().base().clone();
    if !k.is_field() {
        return Err(Error::RingMismatch("lifting starts from a display over a finite field".into()).into());
    }
    let ext = PDExtension::dual_numbers(k.clone())?;
    let bases = filtration_lifts(&d0, &ext)?;
    let lifts: Vec<DisplayJson> =
        bases.iter().map(|b| gm_lift(&d0, &ext, b).map(|g| g.lifted.to_json())).collect::<crate::Result<_>>()?;
    let expected = k.size().pow((d0.d() * (d0.h() - d0.d())) as u32);
    let res = LiftOut {
        special: spec_of(&d0, &k.descriptor())?,
        extension: format!("{} -> {}", ext.s.ring().label(), ext.r.ring().label()),
        filtration_lifts: lifts.len(),
        expected,
        lifts,
    };
    let table = format!("filtration lifts {}\nexpected {}", res.filtration_lifts, expected);
    emit(&a.out, &res, &table)?;
    if res.filtration_lifts as u128 == expected {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} lifts, expected {expected}", res.filtration_lifts)))
    }
}

#[derive(Serialize)]
struct RigidityOut {
    ring: RingDescriptor,
    precision: usize,
    a0: MatJson,
    a: MatJson,
    t: MatJson,
    residual_zero: bool,
}

fn deform_rigidity(field: &Field, h: usize, precision: usize, seed: u64, out: &Output) -> Outcome<()> {
    if h == 0 {
        return Err(Error::BadRank("h = 0".into()).into());
    }
    let s = BaseRing::truncated(field_ring(field)?, 2)?;
    let z = ZinkRing::new(ArtinLocal::new(s.clone())?, precision)?;
    let r = Coeff::Zink(z.clone());
    let mut g = rng(seed);
    let a0 = Mat::random_invertible(&r, h, &mut g).map(|x| z.section_vec(&z.split(x).0));
    let nil = Mat::from_fn(h, h, |_, _| z.split(&r.sample(&mut g)).1);
    let a = a0.add(&r, &nil);
    let t = rigidity_series(&a0, &a, &z)?;
    let residual_zero = rigidity_residual(&a0, &a, &t, &z)?.is_zero(&r);
    let w = z.witt();
    let res = RigidityOut {
        ring: s.descriptor(),
        precision,
        a0: mat_json(&a0, w),
        a: mat_json(&a, w),
        t: mat_json(&t, w),
        residual_zero,
    };
    let table = format!("T\n{}\nresidual zero {residual_zero}", t.fmt_with(w));
    emit(out, &res, &table)?;
    if residual_zero {
        Ok(())
    } else {
        Err(Failure::Check("T does not solve T = A σ(T) A₀⁻¹".into()))
    }
}

#[derive(Serialize)]
struct SelftestOut {
    checks: Vec<(String, bool)>,
}

/// Small exact checks, one per module invariant family.
fn selftest(out: &Output) -> Outcome<()> {
    type Check = fn() -> crate::Result<bool>;
    let checks: Vec<(&str, Check)> = vec![
        ("ring axioms", check_ring),
        ("witt ghost homomorphism", check_ghost),
        ("witt FV = p", check_fv),
        ("witt divided frobenius", check_divided),
        ("zink split round trip", check_zink),
        ("pair section after comparison is p", check_tilde),
        ("display double dual", check_dual),
        ("census mass h=1 d=0", check_census),
        ("deform lifts h=2 d=1", check_lifts),
        ("deform rigidity", check_rigidity),
        ("adm rank two", check_adm),
    ];
    let mut results = Vec::new();
    for (name, f) in checks {
        let ok = f().unwrap_or(false);
        results.push((name.to_string(), ok));
    }
    let table: Vec<String> =
        results.iter().map(|(n, ok)| format!("{} {n}", if *ok { "ok  " } else { "FAIL" })).collect();
    let res = SelftestOut { checks: results.clone() };
    if let Some(path) = &out.out {
        write_file(path, &to_text(&res))?;
    }
    println!("{}", table.join("\n"));
    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn check_ring() -> crate::Result<bool> {
    let mut g = rng(1);
    for r in [BaseRing::galois(3, 2)?, BaseRing::integers_mod(5, 2)?, BaseRing::truncated(BaseRing::prime(3)?, 2)?] {
        if !crate::ring::ring_axiom_check(&*r, 100, &mut g).passed() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_ghost() -> crate::Result<bool> {
    let w = WittRing::new(BaseRing::integers_mod(3, 3)?, 3)?;
    let mut g = rng(2);
    let base = w.base().clone();
    Ok((0..100).all(|_| {
        let (x, y) = (w.random(&mut g), w.random(&mut g));
        let (gx, gy) = (w.ghost(&x), w.ghost(&y));
        let add: Vec<_> = gx.iter().zip(&gy).map(|(a, b)| base.add(a, b)).collect();
        let mul: Vec<_> = gx.iter().zip(&gy).map(|(a, b)| base.mul(a, b)).collect();
        w.ghost(&w.add(&x, &y)) == add && w.ghost(&w.mul(&x, &y)) == mul
    }))
}

fn check_fv() -> crate::Result<bool> {
    let w = WittRing::new(BaseRing::galois(3, 2)?, 3)?;
    let lower = w.with_len(2)?;
    let mut g = rng(3);
    for _ in 0..50 {
        let x = w.random(&mut g);
        let fv = w.frobenius(&w.verschiebung(&x), &lower)?;
        if fv != lower.times_p(&w.truncate(&x, &lower)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_divided() -> crate::Result<bool> {
    let w = WittRing::new(BaseRing::truncated(BaseRing::prime(3)?, 2)?, 3)?;
    let lower = w.with_len(2)?;
    let mut g = rng(4);
    for _ in 0..50 {
        let x = w.verschiebung(&w.random(&mut g));
        let div = w.divided_frobenius(&x, &lower)?;
        if lower.times_p(&div) != w.frobenius(&x, &lower)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_zink() -> crate::Result<bool> {
    let z = ZinkRing::new(ArtinLocal::new(BaseRing::truncated(BaseRing::prime(3)?, 2)?)?, 3)?;
    for x in z.elements() {
        let (wk, nil) = z.split(&x);
        if z.from_parts(&wk, &nil)? != x {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_tilde() -> crate::Result<bool> {
    let w = WittRing::new(BaseRing::prime(3)?, 3)?;
    let mut g = rng(5);
    let pair = pair_make(w.clone(), 3, 1, Mat::random_invertible(&w, 3, &mut g))?;
    let t = pair.tilde(2)?;
    let s = &t.ring;
    let p_id = Mat::scalar(s, 3, &s.from_int(3));
    Ok(t.section.mul(s, &t.comparison) == p_id && t.comparison.mul(s, &t.section) == p_id)
}

fn check_dual() -> crate::Result<bool> {
    let w = WittRing::new(BaseRing::galois(3, 2)?, 2)?;
    let coeff = Coeff::Witt(w.clone());
    let small = coeff.tilde_ring(1)?;
    let mut g = rng(6);
    let pair = pair_make(w.clone(), 2, 1, Mat::random_invertible(&w, 2, &mut g))?;
    let d = display_make(pair, 1, Mat::random_invertible(&small, 2, &mut g))?;
    Ok(d.dual()?.dual()? == d)
}

fn check_census() -> crate::Result<bool> {
    let c = run_census(CensusParams { h: 1, d: 0, p: 3, f: 1, m: 2, n: 1 }, DEFAULT_BUDGET)?;
    Ok(c.classes.len() == 2 && c.mass_ok() && c.mass.to_string() == "1/3" && c.orbit_stabilizer_ok)
}

fn check_lifts() -> crate::Result<bool> {
    let k = BaseRing::prime(3)?;
    let z = Coeff::Zink(ZinkRing::new(ArtinLocal::new(k.clone())?, 3)?);
    let small = z.tilde_ring(2)?;
    let d0 = display_make(Pair::standard(z, 2, 1)?, 2, Mat::identity(&small, 2))?;
    let ext = PDExtension::dual_numbers(k)?;
    let bases = filtration_lifts(&d0, &ext)?;
    let fibers = universal_deformation(&d0, 1, None)?.first_order_fibers()?;
    Ok(bases.len() == 3 && fibers.bijective)
}

fn check_rigidity() -> crate::Result<bool> {
    let z = ZinkRing::new(ArtinLocal::new(BaseRing::truncated(BaseRing::prime(3)?, 2)?)?, 3)?;
    let r = Coeff::Zink(z.clone());
    let mut g = rng(7);
    let a0 = Mat::random_invertible(&r, 2, &mut g).map(|x| z.section_vec(&z.split(x).0));
    let a = a0.add(&r, &Mat::from_fn(2, 2, |_, _| z.split(&r.sample(&mut g)).1));
    let t = rigidity_series(&a0, &a, &z)?;
    Ok(rigidity_residual(&a0, &a, &t, &z)?.is_zero(&r))
}

fn check_adm() -> crate::Result<bool> {
    let adm = admissible_set(2, 1)?;
    Ok(adm.len() == 3 && adm.maximal().len() == 2)
}
