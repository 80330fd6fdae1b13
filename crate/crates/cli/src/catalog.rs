//! The builtin scenario kinds and their parameters.

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    SigmaMap,
    Overlap,
    Individuality,
    Bounds,
    Moments,
    AppendixA,
    Trajectory,
    Reversibility,
    Decay,
    ReducedDynamics,
}

pub struct KindInfo {
    pub kind: Kind,
    pub name: &'static str,
    pub topic: &'static str,
    pub summary: &'static str,
    pub required: &'static [&'static str],
    pub optional: &'static [(&'static str, &'static str)],
}

const COMPOSITE: [(&str, &str); 4] = [
    ("self_terms", "random Hermitian per subsystem"),
    ("self_scale", "1.0"),
    (
        "couplings",
        "[] ([i, j, strength] triples, random Hermitian pair terms)",
    ),
    ("state", "random normalized state"),
];

pub const CATALOG: &[KindInfo] = &[
    KindInfo {
        kind: Kind::SigmaMap,
        name: "sigma-map",
        topic: "Gaussian time-averaged state and its indeterminacy bound",
        summary: "time average of a pure state over a truncated Gaussian local-time window",
        required: &["hamiltonian", "state", "t0", "half_width"],
        optional: &[("sigma", "half_width"), ("nodes", "64"), ("beta", "none (thermal check skipped)"), ("enforce_tau", "true")],
    },
    KindInfo {
        kind: Kind::Overlap,
        name: "overlap",
        topic: "distinguishability overlap of a system with itself at shifted local times",
        summary: "S for a uniform or tabulated offset density (`r`), or for explicit block levels (`energies`, `offsets`)",
        required: &["r | energies + offsets"],
        optional: &[("density", "uniform on [0, r]"), ("points", "2001"), ("degeneracies", "all 1"), ("weights", "uniform")],
    },
    KindInfo {
        kind: Kind::Individuality,
        name: "individuality",
        topic: "individuality as the normalized trace of the shifted product propagator",
        summary: "I = tr(e^{-i sum H_b dt_b}) / D from block levels",
        required: &["energies", "offsets"],
        optional: &[("degeneracies", "all 1")],
    },
    KindInfo {
        kind: Kind::Bounds,
        name: "bounds",
        topic: "orthogonal transition time bounds for growing composites",
        summary: "tau^(N) for the first N subsystems' excess energies, plus an optional qubit orthogonalization check",
        required: &["excess"],
        optional: &[("qubit_omega", "none")],
    },
    KindInfo {
        kind: Kind::Moments,
        name: "moments",
        topic: "moments of random-state coefficients on the unit sphere",
        summary: "Monte Carlo mean, second moment and spread of |c_0|^2 against exact values",
        required: &["dim", "samples"],
        optional: &[("chunk", "10000")],
    },
    KindInfo {
        kind: Kind::AppendixA,
        name: "appendix-a",
        topic: "two-qubit worked example of the distinguishability overlap",
        summary: "|S|^2 for two qubits with the standard offsets",
        required: &[],
        optional: &[("omega1", "1.0"), ("omega2", "1.0")],
    },
    KindInfo {
        kind: Kind::Trajectory,
        name: "trajectory",
        topic: "multi-time evolution and restructuring of composite systems",
        summary: "sequence of partitions evolved with sampled local times, with replay and partition detection",
        required: &["dims", "stages", "t0", "half_width"],
        optional: &[
            ("self_terms", COMPOSITE[0].1),
            ("self_scale", COMPOSITE[1].1),
            ("couplings", COMPOSITE[2].1),
            ("state", COMPOSITE[3].1),
            ("epsilon", "1e-3"),
            ("compare", "none (two partitions)"),
            ("probes", "8"),
        ],
    },
    KindInfo {
        kind: Kind::Reversibility,
        name: "reversibility",
        topic: "relative entropy of transition tables and plain irreversibility",
        summary: "forward/backward runs with fresh local times, and the entropy of coarse-grained redistributions",
        required: &["dims", "stages", "t0", "half_width"],
        optional: &[
            ("self_terms", COMPOSITE[0].1),
            ("self_scale", COMPOSITE[1].1),
            ("couplings", COMPOSITE[2].1),
            ("state", COMPOSITE[3].1),
            ("trials", "100"),
            ("bins", "4"),
            ("table", "none (square weight matrix)"),
        ],
    },
    KindInfo {
        kind: Kind::Decay,
        name: "decay",
        topic: "nonexponential decay chains driven by rational clock rates",
        summary: "mother/daughter populations from the ODE and the closed form",
        required: &["lambda_a", "lambda_b", "t_max"],
        optional: &[("n0", "1.0"), ("points", "101"), ("clock_a", "unit ([a, b, p] for canonical)"), ("clock_b", "unit")],
    },
    KindInfo {
        kind: Kind::ReducedDynamics,
        name: "reduced-dynamics",
        topic: "reduced states of four subsystems under merging and restructuring",
        summary: "diagonal weights of every subsystem before, after merging and after restructuring",
        required: &[],
        optional: &[("t12", "1.0"), ("t34", "1.0"), ("t1", "0.5"), ("t23", "1.0"), ("t4", "0.5")],
    },
];

impl Kind {
    pub fn from_name(name: &str) -> Option<Kind> {
        CATALOG.iter().find(|k| k.name == name).map(|k| k.kind)
    }

    pub fn info(self) -> &'static KindInfo {
        CATALOG
            .iter()
            .find(|k| k.kind == self)
            .expect("every kind is catalogued")
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }

    /// Every parameter key the kind accepts.
    pub fn accepts(self, key: &str) -> bool {
        let info = self.info();
        let required = info
            .required
            .iter()
            .flat_map(|r| r.split(['|', '+']).map(str::trim));
        required
            .chain(info.optional.iter().map(|(k, _)| *k))
            .any(|k| k == key)
            || key
                .strip_suffix("_imag")
                .is_some_and(|base| base == "hamiltonian")
    }
}

pub fn catalog_text() -> String {
    let mut out = String::new();
    for k in CATALOG {
        out.push_str(&format!(
            "{}\n  {}\n  topic: {}\n",
            k.name, k.summary, k.topic
        ));
        let req = if k.required.is_empty() {
            "none".to_string()
        } else {
            k.required.join(", ")
        };
        out.push_str(&format!("  required: {req}\n"));
        for (key, default) in k.optional {
            out.push_str(&format!("  {key} = {default}\n"));
        }
        out.push('\n');
    }
    out
}

pub fn catalog_json() -> Value {
    let kinds: Vec<Value> = CATALOG
        .iter()
        .map(|k| {
            let defaults: serde_json::Map<String, Value> = k
                .optional
                .iter()
                .map(|(key, d)| (key.to_string(), json!(d)))
                .collect();
            json!({
                "kind": k.name,
                "summary": k.summary,
                "topic": k.topic,
                "required": k.required,
                "defaults": defaults,
            })
        })
        .collect();
    json!({ "kinds": kinds })
}
