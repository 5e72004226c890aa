use mdiqkd::bsm::{Basis, ChannelDetector, ClickModel};
use mdiqkd::decoy::*;
use mdiqkd::simplex::{self, Relation, Sense};
use mdiqkd::sources::SourceSpec;
use mdiqkd::sweep;
use std::io::Write;

fn main() {
    let cfg = DecoyConfig::new(vec![0.0, 0.1, 0.5], SourceSpec::weak_coherent(0.5)).unwrap();
    let cd = ChannelDetector { eta: 0.3, dark: 6e-6 };
    let obs = sweep::simulate_gains(&cfg, &cd, ClickModel::Literal, 12).unwrap();
    let z = build_constraints(&cfg, &obs, Basis::Z).unwrap();
    let cons = z.constraints_for_inspection();
    let nv = cons[0].coeffs.len();
    let mut obj = vec![0.0; nv];
    obj[z.var_index(1, 1).unwrap()] = 1.0;
    let sol = simplex::solve(&obj, cons, Sense::Minimize);
    println!("objective {:.15}", sol.objective);
    let mut f = std::fs::File::create("/tmp/rows_dump.txt").unwrap();
    writeln!(f, "{} {}", nv, cons.len()).unwrap();
    for c in cons {
        let rel = if c.relation == Relation::LessEq { "L" } else { "G" };
        let coeffs: Vec<String> = c.coeffs.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{rel} {:.17e} {}", c.rhs, coeffs.join(" ")).unwrap();
    }
    let xs: Vec<String> = sol.x.iter().map(|v| format!("{v:.17e}")).collect();
    std::fs::write("/tmp/x_dump.txt", xs.join(" ")).unwrap();
}
