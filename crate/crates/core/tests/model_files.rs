use std::path::PathBuf;

use uhlmann_core::{analyze, builtin, load_model, scalar_curvature};

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

#[test]
fn shipped_models_load_and_evaluate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(models_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let model = load_model(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let x = vec![0.7; model.params().len()];
        let a = analyze(&model, &x).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(scalar_curvature(&a.spectrum, &a.geometry).c.is_finite());
        seen += 1;
    }
    assert!(seen >= 2);
}

#[test]
fn file_model_matches_builtin() {
    let text = std::fs::read_to_string(models_dir().join("phase-diffusion.toml")).unwrap();
    let file = load_model(&text).unwrap();
    let built = builtin("phase-diffusion-qubit").unwrap();
    for x in [[0.0, 0.3], [1.2, 0.9], [-2.0, 1.7]] {
        let a = file.evaluate(&x).unwrap();
        let b = built.evaluate(&x).unwrap();
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.drho, b.drho);
    }
}
