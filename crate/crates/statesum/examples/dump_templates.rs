//! Print the oriented 3-dimensional move census and, with `--manifest`,
//! emit the frozen JSON manifest the integration tests compare against.
//!
//! ```text
//! cargo run --example dump_templates [-- --manifest]
//! ```

use serde_json::json;
use statesum::statesum3d::pachner_templates_3d;

fn main() {
    let ts = pachner_templates_3d().unwrap();
    let manifest = std::env::args().any(|a| a == "--manifest");
    let rows: Vec<serde_json::Value> = ts
        .iter()
        .map(|t| {
            let before_signs: Vec<i8> =
                (0..t.before.simplices().len()).map(|i| t.before.height_sign(i)).collect();
            let after_signs: Vec<i8> =
                (0..t.after.simplices().len()).map(|i| t.after.height_sign(i)).collect();
            json!({
                "name": t.name,
                "before_f": t.before.f_vector(),
                "before_signs": before_signs,
                "after_f": t.after.f_vector(),
                "after_signs": after_signs,
            })
        })
        .collect();
    if manifest {
        let doc = json!({ "count": ts.len(), "templates": rows });
        println!("{}", statesum::io::render_canonical(&doc));
    } else {
        println!("total {}", ts.len());
        for r in &rows {
            println!(
                "{} | before f={} signs={} | after f={} signs={}",
                r["name"].as_str().unwrap(),
                r["before_f"],
                r["before_signs"],
                r["after_f"],
                r["after_signs"]
            );
        }
    }
}
