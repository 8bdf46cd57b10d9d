//! Configuration parsing as done by `bsqlab`, without running anything.

use bsq_lab::cli::parse_config_str;

fn main() {
    let text = "seed = 7\n[grid]\nn = 512\n[model]\nkind = \"unit\"\n";
    let cfg = parse_config_str(
        text,
        &["run.t_final=2.5".into(), "family=random_bumps".into()],
    )
    .expect("valid config");
    println!("{}", toml::to_string(&cfg).expect("serializable"));

    for bad in ["model.n0=3", "model.epsilon=1.5", "grid.m=1", "n=64"] {
        match parse_config_str("", &[bad.into()]) {
            Ok(_) => println!("{bad}: accepted"),
            Err(e) => println!("{bad}: {e}"),
        }
    }
}
