//! Built-in experiment configurations.

use crate::config::ExperimentConfig;

pub struct Recipe {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: &'static str,
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "kagome-floquet-bands",
        summary: "Kagome Floquet bands on a 64x64 quasimomentum grid",
        config: r#"
command = "floquet"
[floquet]
grid = 64
"#,
    },
    Recipe {
        name: "kagome-flat-band",
        summary: "flatness of the top Kagome band at 3/2",
        config: r#"
command = "floquet"
[floquet]
grid = 64
"#,
    },
    Recipe {
        name: "comb-jump-one-third",
        summary: "combinatorial IDS jump at 3/2 from interior hexagon counts",
        config: r#"
command = "comb-ids"
[comb_ids]
sizes = [4, 8, 16, 32]
mu = 1.5
"#,
    },
    Recipe {
        name: "metric-jump-one-sixth",
        summary: "metric IDS jump at (2pi/3)^2 on the equilateral Kagome box n = 4",
        config: r#"
command = "jump"
[graph]
lattice = "kagome"
box = 4
[jump]
lambda = 4.386490844928603
eps = [0.4, 0.2, 0.1, 0.05]
"#,
    },
    Recipe {
        name: "metric-jump-one-half",
        summary: "metric IDS jump at pi^2 on the equilateral Kagome box n = 4",
        config: r#"
command = "jump"
[graph]
lattice = "kagome"
box = 4
[jump]
lambda = 9.869604401089358
eps = [0.4, 0.2, 0.1, 0.05]
"#,
    },
    Recipe {
        name: "line-ids",
        summary: "IDS of a chain of 200 unit edges against sqrt(lambda)/pi",
        config: r#"
command = "ids"
[graph]
lattice = "chain"
box = 200
[energies]
min = 1.0
max = 30.0
points = 400
"#,
    },
    Recipe {
        name: "exhaustion-kagome",
        summary: "finite-volume IDS of equilateral Kagome boxes n = 2, 4, 8",
        config: r#"
command = "exhaustion"
[graph]
lattice = "kagome"
box = 8
[exhaustion]
sizes = [2, 4, 8]
[energies]
values = [0.5, 0.85, 1.2, 1.55, 1.9, 2.25, 2.6, 2.95, 3.3, 3.65]
"#,
    },
    Recipe {
        name: "wegner-kagome",
        summary: "expected eigenvalue counts of random Kagome 3x3 boxes in shrinking intervals",
        config: r#"
command = "wegner"
seed = 1
[graph]
lattice = "kagome"
box = 3
[model]
l_min = 0.8
l_max = 1.25
family = { kind = "cosine-squared" }
[wegner]
u = 10.0
centers = [4.386]
widths = [0.4, 0.2, 0.1, 0.05]
samples = 200
"#,
    },
    Recipe {
        name: "wegner-kagome-periodic",
        summary: "the same intervals on the equilateral Kagome 3x3 box",
        config: r#"
command = "wegner"
[graph]
lattice = "kagome"
box = 3
[wegner]
u = 10.0
centers = [4.386]
widths = [0.4, 0.2, 0.1, 0.05]
samples = 1
"#,
    },
    Recipe {
        name: "kagome-box-spectrum",
        summary: "Dirichlet eigenvalues of the equilateral Kagome box n = 2",
        config: r#"
command = "spectrum"
[graph]
lattice = "kagome"
box = 2
[spectrum]
lo = 0.0
hi = 40.0
"#,
    },
    Recipe {
        name: "abstract-ids-kagome",
        summary: "localized-trace IDS of random Kagome boxes n = 4",
        config: r#"
command = "ids"
seed = 3
[graph]
lattice = "kagome"
box = 4
[model]
l_min = 0.8
l_max = 1.25
[ids]
samples = 4
trace_mesh = 8
[energies]
min = 0.0
max = 12.0
points = 61
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

pub fn load(name: &str) -> Option<ExperimentConfig> {
    find(name).map(|r| ExperimentConfig::parse(r.config).expect("built-in recipe is valid"))
}
