//! Browser bindings. Each export returns a JSON string; the `*_json`
//! functions hold the logic and are testable natively.

use kzbraid::checks::{fixture_loop, generator_pair};
use kzbraid::cli::parse_braid_word;
use kzbraid::equivalence::{common_scalar, ratio_multiset_deviation};
use kzbraid::holonomy::braid_generator_path;
use kzbraid::kz_connection::ConfigPoint;
use kzbraid::linalg::{eigenvalues, C64};
use kzbraid::loopspace::{currents, BracketContext, SUGAWARA_CONSTANT};
use kzbraid::rmatrix::QDeformation;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn pairs(zs: &[C64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

fn err(e: kzbraid::Error) -> String {
    e.to_string()
}

/// Eigenvalues of the holonomy and R-matrix generators for `su(2)`, the
/// fitted scalar `c` and `c·ρ` spectra, which should land on `ν`.
pub fn spectra_json(level: u32, strands: usize, tol: f64) -> Result<String, String> {
    if level == 0 || !(2..=5).contains(&strands) {
        return Err("level must be ≥ 1 and strands in 2..=5".into());
    }
    let (rhos, nus) = generator_pair(2, strands, level, tol).map_err(err)?;
    let m = common_scalar(&rhos, &nus).map_err(err)?;
    let mut gens = Vec::new();
    let mut ratio: f64 = 0.0;
    for (i, (r, n)) in rhos.iter().zip(&nus).enumerate() {
        let rho = eigenvalues(r);
        let scaled: Vec<C64> = rho.iter().map(|z| z * m.c).collect();
        ratio = ratio.max(ratio_multiset_deviation(r, n).map_err(err)?);
        gens.push(json!({
            "index": i + 1,
            "rho": pairs(&rho),
            "rho_scaled": pairs(&scaled),
            "nu": pairs(&eigenvalues(n)),
        }));
    }
    let q = QDeformation::su(2, level).q;
    Ok(json!({
        "q": [q.re, q.im],
        "c": [m.c.re, m.c.im],
        "deviation": m.deviation,
        "ratio_deviation": ratio,
        "generators": gens,
    })
    .to_string())
}

/// Positions of every strand along the standard exchange paths of a word,
/// as `[t, x, y]` triples with `t ∈ [0, letters]`.
pub fn world_lines_json(word: &str, strands: usize, samples: usize) -> Result<String, String> {
    if !(2..=8).contains(&strands) {
        return Err("strands must be in 2..=8".into());
    }
    let w = parse_braid_word(word).map_err(err)?;
    w.validate(strands).map_err(err)?;
    let base = ConfigPoint::standard(strands);
    let samples = samples.clamp(2, 200);
    // slot[j] = strand currently sitting at base position j
    let mut slot: Vec<usize> = (0..strands).collect();
    let mut lines: Vec<Vec<[f64; 3]>> = vec![Vec::new(); strands];
    for (step, letter) in w.letters().iter().enumerate() {
        let path = braid_generator_path(&base, letter.index, letter.sign).map_err(err)?;
        for s in 0..=samples {
            if s == 0 && step > 0 {
                continue;
            }
            let t = s as f64 / samples as f64;
            let (pos, _) = path.eval(0, t);
            for (j, z) in pos.iter().enumerate() {
                lines[slot[j]].push([step as f64 + t, z.re, z.im]);
            }
        }
        slot.swap(letter.index - 1, letter.index);
    }
    if w.is_empty() {
        for (j, z) in base.positions().iter().enumerate() {
            lines[j] = vec![[0.0, z.re, z.im], [1.0, z.re, z.im]];
        }
    }
    Ok(json!({ "strands": strands, "letters": w.len(), "word": w.to_string(), "lines": lines }).to_string())
}

/// Current and Virasoro spectra of a seeded random `su(2)` loop, with the
/// Sugawara residual.
pub fn loop_spectrum_json(seed: u32, grid: usize, modes: i64) -> Result<String, String> {
    let lp = fixture_loop(2, seed as u64, 0, grid).map_err(err)?;
    let table = currents(&lp).map_err(err)?;
    let range = modes.clamp(1, table.nmax);
    let ctx = BracketContext::new(&lp).map_err(err)?;
    let mut norms = Vec::new();
    let mut vir = Vec::new();
    let mut sugawara: f64 = 0.0;
    for n in -range..=range {
        let j: f64 = (0..lp.basis().dim()).map(|a| table.current(n, a).map(|z| z.norm_sqr())).sum::<kzbraid::Result<f64>>().map_err(err)?;
        norms.push(j.sqrt());
        let l = table.virasoro(n).map_err(err)?;
        vir.push([l.re, l.im]);
        if n.abs() <= 3 {
            sugawara = sugawara.max(ctx.sugawara_check(n, SUGAWARA_CONSTANT).map_err(err)?);
        }
    }
    Ok(json!({
        "modes": (-range..=range).collect::<Vec<_>>(),
        "current_norms": norms,
        "virasoro": vir,
        "energy": table.energy,
        "bandwidth": lp.bandwidth(),
        "sugawara_residual": sugawara,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn spectra(level: u32, strands: usize, tol: f64) -> Result<String, JsError> {
    spectra_json(level, strands, tol).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn world_lines(word: &str, strands: usize, samples: usize) -> Result<String, JsError> {
    world_lines_json(word, strands, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn loop_spectrum(seed: u32, grid: usize, modes: i32) -> Result<String, JsError> {
    loop_spectrum_json(seed, grid, modes as i64).map_err(|e| JsError::new(&e))
}
