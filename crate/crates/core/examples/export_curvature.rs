//! Write one curvature datum from the built-in families as a JSON
//! document consumable by `vbforms ellipticity --input`.
//!
//! Usage:
//!   export_curvature trivial <n> <r> <rho> <out.json>
//!   export_curvature vbma <t> <out.json>
//!   export_curvature j <s> <out.json>

use vbforms::forms::CurvatureData;
use vbforms::models::{j_path, vbma_path};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let usage =
        "usage: export_curvature trivial <n> <r> <rho> <out> | vbma <t> <out> | j <s> <out>";
    let result = match args.first().map(String::as_str) {
        Some("trivial") if args.len() == 5 => {
            let n: usize = args[1].parse().expect("n");
            let r: usize = args[2].parse().expect("r");
            let rho: f64 = args[3].parse().expect("rho");
            std::fs::write(&args[4], CurvatureData::trivial(n, r, rho).to_json())
        }
        Some("vbma") if args.len() == 3 => {
            let t: f64 = args[1].parse().expect("t");
            std::fs::write(&args[2], vbma_path(t).expect("path point").data.to_json())
        }
        Some("j") if args.len() == 3 => {
            let s: f64 = args[1].parse().expect("s");
            std::fs::write(&args[2], j_path(s).expect("path point").data.to_json())
        }
        _ => {
            eprintln!("{usage}");
            std::process::exit(2);
        }
    };
    result.expect("write output");
}
