use std::path::PathBuf;
use std::time::Instant;

use crate::checks::{self, bounds, CheckOptions, CheckTable};
use crate::equivalence::{compare_generators, ConjugatorOutcome};
use crate::holonomy::{braid_relation_residuals, check_tolerance, monodromy_generator, monodromy_word, two_strand_closed_form, BraidWord};
use crate::kz_connection::{ConfigPoint, ConnectionCoefficients};
use crate::lie_core::{build_su_basis, infinitesimal_braid_residuals, SiteSystem};
use crate::linalg::{eigenvalues, frob, to_pairs, C64};
use crate::loopspace::currents;
use crate::rmatrix::{build_r, qybe_residual, rcheck_relations, tl_residuals, QDeformation};
use crate::{Error, Result};

use super::parse::parse_braid_word;
use super::report::{ConfigEcho, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Monodromy,
    Rmatrix,
    Flatness,
    Compare,
    LoopBrackets,
    GaussResidue,
    AllChecks,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Monodromy,
        Command::Rmatrix,
        Command::Flatness,
        Command::Compare,
        Command::LoopBrackets,
        Command::GaussResidue,
        Command::AllChecks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Monodromy => "monodromy",
            Command::Rmatrix => "rmatrix",
            Command::Flatness => "flatness",
            Command::Compare => "compare",
            Command::LoopBrackets => "loop-brackets",
            Command::GaussResidue => "gauss-residue",
            Command::AllChecks => "all-checks",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Largest accepted state-space dimension `N^n`.
pub const MAX_STATE_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rank: usize,
    pub level: u32,
    pub strands: usize,
    pub word: String,
    pub tol: f64,
    pub grid: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { rank: 2, level: 2, strands: 2, word: "s1".into(), tol: 1e-10, grid: 256, seed: 0, out: None }
    }
}

impl RunConfig {
    /// Range checks; returns the parsed word, validated against the strands.
    pub fn validate(&self) -> Result<BraidWord> {
        if self.rank < 2 {
            return Err(Error::RankTooSmall(self.rank));
        }
        if self.level == 0 {
            return Err(Error::Config("level must be at least 1".into()));
        }
        if self.strands < 2 {
            return Err(Error::TooFewSites { required: 2, got: self.strands });
        }
        let too_big = (self.rank as f64).powi(self.strands as i32) > MAX_STATE_DIM as f64;
        if too_big {
            return Err(Error::Config(format!("su{}^{} exceeds the state dimension limit {MAX_STATE_DIM}", self.rank, self.strands)));
        }
        check_tolerance(self.tol)?;
        if !(16..=1 << 16).contains(&self.grid) {
            return Err(Error::Config(format!("grid must lie in 16..=65536, got {}", self.grid)));
        }
        let word = parse_braid_word(&self.word)?;
        word.validate(self.strands)?;
        Ok(word)
    }

    fn echo(&self, word: &BraidWord) -> ConfigEcho {
        ConfigEcho {
            algebra: format!("su{}", self.rank),
            level: self.level,
            strands: self.strands,
            word: word.to_string(),
            tol: self.tol,
            grid: self.grid,
            seed: self.seed,
            out: self.out.as_ref().map(|p| p.display().to_string()),
        }
    }
}

/// `0` when every bounded residual holds, `2` when one exceeds its bound,
/// `1` for input errors.
pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.passed => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

fn eig_pairs(m: &crate::linalg::CMat) -> Vec<[f64; 2]> {
    eigenvalues(m).iter().map(|z| [z.re, z.im]).collect()
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Runs one subcommand. Writing the report is left to the caller.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report> {
    let word = cfg.validate()?;
    let mut report = Report::new(cmd.name(), cfg.echo(&word));
    let started = Instant::now();
    match cmd {
        Command::Monodromy => monodromy(cfg, &word, &mut report)?,
        Command::Rmatrix => rmatrix(cfg, &mut report)?,
        Command::Flatness => flatness(cfg, &mut report)?,
        Command::Compare => compare(cfg, &word, &mut report)?,
        Command::LoopBrackets => loop_brackets(cfg, &mut report)?,
        Command::GaussResidue => {
            report.push_table(checks::gauss_table(cfg.rank, &[cfg.strands], &[cfg.level], cfg.grid, cfg.seed)?);
        }
        Command::AllChecks => {
            let opts = CheckOptions { tol: cfg.tol, grid: cfg.grid, seed: cfg.seed };
            for (name, sweep) in checks::SWEEPS {
                let t0 = Instant::now();
                report.push_table(sweep(&opts)?);
                report.timings_ms.insert(name.to_string(), t0.elapsed().as_secs_f64() * 1e3);
            }
        }
    }
    report.timings_ms.insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

fn monodromy(cfg: &RunConfig, word: &BraidWord, report: &mut Report) -> Result<()> {
    let n = cfg.strands;
    let base = ConfigPoint::standard(n);
    let coeffs = ConnectionCoefficients::su(cfg.rank, n, cfg.level)?;
    let rho = monodromy_word(&coeffs, &base, word, cfg.tol)?;
    let mut t = CheckTable::new("monodromy");
    if n == 2 {
        let exact = two_strand_closed_form(&coeffs, word.len(), word.exponent_sum())?;
        t.bounded("closed form", frob(&(&rho - exact)), bounds::MONODROMY);
    }
    let gens: Vec<_> = (1..n).map(|i| monodromy_generator(&coeffs, &base, i, 1, cfg.tol)).collect::<Result<_>>()?;
    for (key, value) in braid_relation_residuals(&gens) {
        t.bounded(key, value, bounds::BRAID);
    }
    report.push_table(t);
    report.insert("matrix", to_pairs(&rho));
    report.insert("eigenvalues", eig_pairs(&rho));
    report.insert("generator_eigenvalues", gens.iter().map(eig_pairs).collect::<Vec<_>>());
    Ok(())
}

fn rmatrix(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let qd = QDeformation::su(cfg.rank, cfg.level);
    let rm = build_r(cfg.rank, qd)?;
    let rel = rcheck_relations(&rm);
    let mut t = CheckTable::new("R-matrix identities");
    t.bounded("QYBE", qybe_residual(&rm), bounds::ALGEBRAIC);
    t.bounded("Rcheck quadratic", rel.quadratic, bounds::ALGEBRAIC);
    t.bounded("braided YBE", rel.braided_ybe, bounds::ALGEBRAIC);
    for (key, value) in tl_residuals(&rm, cfg.strands)? {
        t.bounded(format!("TLJ {key}"), value, bounds::ALGEBRAIC);
    }
    report.push_table(t);
    report.insert("q", pair(qd.q));
    report.insert("sqrt_q", pair(qd.sqrt_q));
    report.insert("R", to_pairs(rm.r()));
    report.insert("Rcheck", to_pairs(rm.rcheck()));
    report.insert("Rcheck_eigenvalues", rel.eigenvalues.iter().map(|&z| pair(z)).collect::<Vec<_>>());
    Ok(())
}

fn flatness(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    report.push_table(checks::flatness(&[cfg.rank], &[cfg.strands], cfg.level, 20, cfg.seed)?);
    if cfg.strands < 3 {
        return Ok(());
    }
    let basis = build_su_basis(cfg.rank)?;
    let sys = SiteSystem::fundamental(&basis, cfg.strands);
    let mut t = CheckTable::new("infinitesimal braid relations");
    for (key, value) in infinitesimal_braid_residuals(&sys, &basis)? {
        t.bounded(key, value, bounds::ALGEBRAIC);
    }
    report.push_table(t);
    Ok(())
}

fn compare(cfg: &RunConfig, word: &BraidWord, report: &mut Report) -> Result<()> {
    let n = cfg.strands;
    let (rhos, nus) = checks::generator_pair(cfg.rank, n, cfg.level, cfg.tol)?;
    let mut words = checks::comparison_words(n);
    if !words.contains(word) {
        words.push(word.clone());
    }
    let rep = compare_generators(&rhos, &nus, &words, true, cfg.seed)?;
    let mut t = CheckTable::new("holonomy vs R-matrix");
    checks::record_comparison(&mut t, &format!("su{} n={n} k={}", cfg.rank, cfg.level), &rep, cfg.tol);
    report.push_table(t);
    report.insert("c", pair(rep.c));
    report.insert("c_abs", rep.c_abs);
    report.insert("eig_deviation", rep.eig_deviation);
    report.insert("ratio_deviation", rep.ratio_deviation);
    report.insert("trace_deviations", &rep.trace_deviations);
    let (residual, condition) = match &rep.conjugator {
        Some(ConjugatorOutcome::Found { residual, condition, .. }) => (Some(*residual), Some(*condition)),
        _ => (None, None),
    };
    report.insert("conjugator_residual", residual);
    report.insert("conjugator_condition", condition);
    report.insert("rho_eigenvalues", rhos.iter().map(eig_pairs).collect::<Vec<_>>());
    report.insert("nu_eigenvalues", nus.iter().map(eig_pairs).collect::<Vec<_>>());
    Ok(())
}

fn loop_brackets(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    report.push_table(checks::loop_bracket_table(cfg.rank, 1, cfg.seed, cfg.grid, 3)?);
    report.push_table(checks::transgression_table(cfg.rank, 1, cfg.seed, cfg.grid)?);
    let lp = checks::fixture_loop(cfg.rank, cfg.seed, 0, cfg.grid)?;
    let table = currents(&lp)?;
    let range = table.nmax.min(3);
    let dim = lp.basis().dim();
    let j: Vec<Vec<[f64; 2]>> = (-range..=range)
        .map(|n| (0..dim).map(|a| table.current(n, a).map(pair)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let l: Vec<[f64; 2]> = (-range..=range).map(|n| table.virasoro(n).map(pair)).collect::<Result<_>>()?;
    report.insert("modes", (-range..=range).collect::<Vec<_>>());
    report.insert("J", j);
    report.insert("l", l);
    report.insert("energy", table.energy);
    report.insert("bandwidth", lp.bandwidth());
    report.insert("required_grid", lp.required_grid());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::from_name(c.name()), Some(c));
        }
        assert_eq!(Command::from_name("bogus"), None);
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        assert!(RunConfig { word: "s2".into(), ..cfg() }.validate().is_err());
        assert!(RunConfig { word: "s2".into(), strands: 3, ..cfg() }.validate().is_ok());
        assert!(RunConfig { level: 0, ..cfg() }.validate().is_err());
        assert!(RunConfig { strands: 1, ..cfg() }.validate().is_err());
        assert!(RunConfig { rank: 4, strands: 7, ..cfg() }.validate().is_err());
        assert!(RunConfig { tol: 1.0, ..cfg() }.validate().is_err());
        assert!(RunConfig { grid: 4, ..cfg() }.validate().is_err());
    }

    #[test]
    fn rmatrix_report() {
        let r = run(Command::Rmatrix, &RunConfig { level: 3, strands: 3, ..cfg() }).unwrap();
        assert!(r.passed);
        let t = &r.tables[0];
        assert!(t.get("QYBE").is_some() && t.get("TLJ far[1,3]").is_none());
        assert!(t.get("TLJ braid[1,2]").unwrap().value <= 1e-12);
        assert_eq!(exit_code(&Ok(r)), 0);
    }

    #[test]
    fn two_strand_full_twist() {
        let r = run(Command::Monodromy, &RunConfig { word: "s1 s1".into(), ..cfg() }).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        assert!(r.tables[0].get("closed form").unwrap().value <= 1e-8);
        assert_eq!(r.config.word, "s1 s1");
    }

    #[test]
    fn compare_populates_scalar() {
        let r = run(Command::Compare, &cfg()).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        assert!(r.data["c"].is_array());
        assert!(r.data["conjugator_residual"].as_f64().unwrap() <= 1e-5);
    }

    #[test]
    fn input_errors_exit_one() {
        assert_eq!(exit_code(&run(Command::Monodromy, &RunConfig { word: "s0".into(), ..cfg() })), 1);
    }
}
