use heatplan::io::{
    cells_to_string, load_cells, load_params, read_cells, reference_scenario, synthesize_instance, Profile,
    REFERENCE_PARAMS_JSON,
};
use heatplan::model::CellRecord;
use heatplan::Error;
use proptest::prelude::*;

#[test]
fn synthetic_instances_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for profile in [Profile::HamburgLike, Profile::Uniform] {
        let cells = synthesize_instance(400, 3, profile).unwrap();
        let path = dir.path().join(format!("{profile}.csv"));
        std::fs::write(&path, cells_to_string(&cells).unwrap()).unwrap();
        assert_eq!(load_cells(&path).unwrap(), cells);
    }
}

#[test]
fn synthetic_output_is_stable_across_calls() {
    let a = cells_to_string(&synthesize_instance(750, 42, Profile::HamburgLike).unwrap()).unwrap();
    let b = cells_to_string(&synthesize_instance(750, 42, Profile::HamburgLike).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn load_density_spans_the_ten_megawatt_mark() {
    // Histogram of peak load per km² in decades of kW.
    let cells = synthesize_instance(750, 42, Profile::HamburgLike).unwrap();
    // Buckets: 10 kW, 100 kW, 1 MW, 10 MW and up.
    let mut decades = [0usize; 4];
    for c in &cells {
        let k = (c.peak_kw.log10().floor() as usize).clamp(1, 4) - 1;
        decades[k] += 1;
    }
    assert!(decades[3] > 0, "no cell above 10 MW: {decades:?}");
    assert!(decades[..3].iter().sum::<usize>() > decades[3], "{decades:?}");
    assert!(decades.iter().all(|&n| n > 0), "{decades:?}");
}

#[test]
fn params_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    std::fs::write(&path, REFERENCE_PARAMS_JSON).unwrap();
    assert_eq!(load_params(&path).unwrap(), reference_scenario());
    assert!(matches!(
        load_params(dir.path().join("missing.json")),
        Err(Error::Io(_))
    ));
}

#[test]
fn bad_rows_report_their_line() {
    let text = "cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,1,1,1,0\nb,1,1,1,2\n";
    let err = read_cells(text.as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Row { row: 3, .. }), "{err}");
}

fn cell_strategy() -> impl Strategy<Value = (f64, f64, f64, bool, Option<(f64, f64)>)> {
    (
        0.0..1e9f64,
        0u32..100_000,
        0.0..50_000f64,
        any::<bool>(),
        prop::option::of((-180.0..180.0f64, -90.0..90.0f64)),
    )
        .prop_map(|(h, p, l, w, c)| (h, p as f64, l, w, c))
}

proptest! {
    #[test]
    fn cells_round_trip(rows in prop::collection::vec(cell_strategy(), 1..30), with_centroid in any::<bool>()) {
        let cells: Vec<CellRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(h, p, l, w, c))| {
                let cell = CellRecord::new(format!("id{i}"), h, p, l, w);
                match (with_centroid, c) {
                    (true, Some((lon, lat))) => cell.with_centroid(lon, lat),
                    (true, None) => cell.with_centroid(0.0, 0.0),
                    _ => cell,
                }
            })
            .collect();
        let text = cells_to_string(&cells).unwrap();
        prop_assert_eq!(read_cells(text.as_bytes()).unwrap(), cells);
    }
}
