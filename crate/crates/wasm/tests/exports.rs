use kzbraid_wasm::{loop_spectrum_json, spectra_json, world_lines_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn spectra_land_on_r_matrix_side() {
    let v = parse(spectra_json(2, 3, 1e-10).unwrap());
    assert!(v["deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["generators"].as_array().unwrap().len(), 2);
    assert_eq!(v["generators"][0]["nu"].as_array().unwrap().len(), 8);
    for z in v["generators"][1]["rho_scaled"].as_array().unwrap() {
        let (re, im) = (z[0].as_f64().unwrap(), z[1].as_f64().unwrap());
        assert!((re.hypot(im) - 1.0).abs() < 1e-8);
    }
    assert!(spectra_json(0, 3, 1e-10).is_err());
    assert!(spectra_json(2, 3, 1.0).is_err());
}

#[test]
fn world_lines_follow_the_permutation() {
    let v = parse(world_lines_json("s1 s2^-1", 3, 10).unwrap());
    let lines = v["lines"].as_array().unwrap();
    assert_eq!(lines.len(), 3);
    let end = |s: usize| {
        let l = lines[s].as_array().unwrap();
        let p = l.last().unwrap();
        (p[0].as_f64().unwrap(), p[1].as_f64().unwrap())
    };
    // strand 0 ends at position 1 after s1; then s2 moves it to position 2
    let xs: Vec<f64> = (0..3).map(|s| end(s).1).collect();
    assert_eq!(end(0).0, 2.0);
    assert!(xs[0] > xs[2] && xs[2] > xs[1], "{xs:?}");
    assert_eq!(lines[0].as_array().unwrap().len(), 21);
    assert!(world_lines_json("s0", 3, 10).is_err());
    assert!(world_lines_json("s3", 3, 10).is_err());
    assert_eq!(parse(world_lines_json("", 2, 10).unwrap())["letters"], 0);
}

#[test]
fn loop_spectrum_is_consistent() {
    let v = parse(loop_spectrum_json(1, 256, 6).unwrap());
    assert_eq!(v["modes"].as_array().unwrap().len(), 13);
    assert!(v["sugawara_residual"].as_f64().unwrap() < 1e-8);
    let l0 = v["virasoro"][6][0].as_f64().unwrap();
    assert!((2.0 * l0 - v["energy"].as_f64().unwrap()).abs() < 1e-12);
    assert!(loop_spectrum_json(1, 8, 6).is_err());
}
