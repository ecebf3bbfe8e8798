//! Synthetic inputs shared by the benchmarks.

use std::path::Path;

use yeargraph_core::ingest::parse_reader;
use yeargraph_core::{IngestConfig, SyntheticSpec, TableSnapshot};

/// Three attribute types over `years` years with `applicants` rows each.
pub fn spec(years: usize, applicants: usize) -> SyntheticSpec {
    let years: Vec<String> = (0..years).map(|i| (2014 + i).to_string()).collect();
    let text = format!(
        r#"
version = 1
seed = 42
years = [{}]
applicants_per_year = {applicants}

[[attributes]]
name = "region"
values = ["Hokkaido", "Tohoku", "Kanto", "Chubu", "Kansai", "Chugoku", "Shikoku", "Kyushu"]

[[attributes]]
name = "english"
values = ["Entry", "Business", "Native"]
missing = 0.1

[[attributes]]
name = "club"
values = ["soccer", "tennis", "music", "art", "debate", "none"]
group_size = 2
missing = 0.3
"#,
        years.join(", ")
    );
    SyntheticSpec::from_toml_str(&text).expect("bench spec")
}

/// Parsed tables plus the matching ingest config.
pub fn snapshots(spec: &SyntheticSpec) -> (Vec<TableSnapshot>, IngestConfig) {
    let config = spec.ingest_config();
    let tables = spec
        .generate()
        .expect("generate")
        .into_iter()
        .map(|(year, text)| {
            let name = SyntheticSpec::file_name(year);
            parse_reader(text.as_bytes(), Path::new(&name), year, &config).expect("parse")
        })
        .collect();
    (tables, config)
}
