//! Regenerates the bundled system files under `fixtures/`.
//!
//! `cargo run --example gen_fixtures`

use equiperiod::cli::system::*;
use serde_json::json;

fn main() {
    let mirror_y = json!({"S": [["-1","0"],["0","1"]], "b": ["0","0"]});
    let mirror_x = json!({"S": [["1","0"],["0","-1"]], "b": ["0","0"]});
    let origin = json!({"S": [["-1","0"],["0","-1"]], "b": ["0","0"]});
    let swap = json!({"S": [["0","1"],["1","0"]], "b": ["0","0"]});
    let inv = |name: &str, base: &serde_json::Value, extra: serde_json::Value| {
        let mut v = base.clone();
        v["name"] = json!(name);
        for (k, x) in extra.as_object().unwrap() {
            v[k] = x.clone();
        }
        v
    };
    let h = |f: &str| json!([format!("y*({f})"), format!("-x*({f})")]);
    let vdp = |f: &str| json!([format!("y*({f})"), format!("(-x - y*(x^2 - 1))*({f})")]);
    let lc = json!({"seed": [2.0, 0.0], "section": {"point": [0.0, 0.0], "normal": [0.0, 1.0]}});
    let files = vec![
        (
            "harmonic",
            json!({"field": h("1"), "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible"})),
            inv("mirror-x", &mirror_x, json!({"kind": "reversible"})),
            inv("diagonal", &swap, json!({"kind": "reversible"})),
            inv("origin", &origin, json!({"kind": "symmetric"}))],
            "limit_cycle": {"seed": [0.7, 0.0], "section": {"point": [0.0, 0.0], "normal": [0.0, 1.0]}}}),
        ),
        (
            "two-axis",
            json!({"field": ["y*(1 + x^2)", "-x*(1 + y^2)"], "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible"})),
            inv("mirror-x", &mirror_x, json!({"kind": "reversible"}))]}),
        ),
        (
            "x2-family",
            json!({"field": h("1 - x^2"), "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible", "delta": "x", "scaled": {"field": h("1 - x")}}))]}),
        ),
        ("x2-reduced", json!({"field": h("1 - x"), "involutions": [inv("mirror-y", &mirror_y, json!({}))]})),
        (
            "double-reversible",
            json!({"field": h("(1 - x^2)*(1 - y^4)"), "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible", "delta": "x", "scaled": {"field": h("(1 - x)*(1 - y^4)")}})),
            inv("mirror-x", &mirror_x, json!({"kind": "reversible", "delta": "-y", "scaled": {"field": h("(1 - x^2)*(1 + y + y^2 + y^3)")}}))]}),
        ),
        ("double-reduced-x", json!({"field": h("(1 - x)*(1 - y^4)")})),
        ("double-reduced-y", json!({"field": h("(1 - x^2)*(1 + y + y^2 + y^3)")})),
        (
            "xy-family",
            json!({"field": h("1 - (x + y)^2"), "involutions": [
            inv("origin", &origin, json!({"kind": "symmetric", "delta": "x + y", "scaled": {"field": h("1 - x - y")}}))]}),
        ),
        ("xy-reduced", json!({"field": h("1 - x - y")})),
        (
            "vanderpol",
            json!({"field": vdp("1"), "involutions": [
            inv("origin", &origin, json!({"kind": "symmetric", "delta": "x/3"}))], "limit_cycle": lc}),
        ),
        (
            "vanderpol-mirror",
            json!({"field": vdp("1"), "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible"}))]}),
        ),
        (
            "lienard",
            json!({"field": vdp("1 - x^2/9"), "involutions": [
            inv("origin", &origin, json!({"kind": "symmetric", "delta": "x/3", "scaled": {"field": vdp("1 - x/3")}}))], "limit_cycle": lc}),
        ),
        (
            "harmonic-incompatible",
            json!({"field": h("1"), "alpha": {"num": "1", "den": "1 + x^2"}, "involutions": [
            inv("mirror-y", &mirror_y, json!({"kind": "reversible"}))]}),
        ),
    ];
    for (name, mut v) in files {
        v["name"] = json!(name);
        v["dim"] = json!(2);
        v["vars"] = json!(["x", "y"]);
        let file: SystemFile = serde_json::from_value(v).unwrap();
        let sys = System::from_file(&file).unwrap();
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        std::fs::write(path, sys.to_json() + "\n").unwrap();
    }
}
