//! The map files under `fixtures/` must match the generators.
//! Set `GMCPOS_REGEN_FIXTURES=1` to rewrite them.

use std::path::PathBuf;

use gmcpos::fixtures::{FixtureMap, SCENARIOS};
use gmcpos::mapio::{parse_map, write_ros_map};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn bundled_maps_match_generators() {
    let regen = std::env::var_os("GMCPOS_REGEN_FIXTURES").is_some();
    for map in [FixtureMap::LoopCorridor, FixtureMap::MultiRoom] {
        let path = fixture_dir().join(map.file_name());
        let grid = map.grid();
        if regen {
            std::fs::write(&path, grid.to_ascii()).unwrap();
        }
        assert_eq!(parse_map(&path).unwrap(), grid, "{}", path.display());
    }

    let yaml = fixture_dir().join("loop_corridor.yaml");
    if regen {
        write_ros_map(&FixtureMap::LoopCorridor.grid(), &yaml).unwrap();
    }
    assert_eq!(parse_map(&yaml).unwrap(), FixtureMap::LoopCorridor.grid());
}

#[test]
fn scenario_operators_are_inside_their_maps() {
    for sc in SCENARIOS {
        let grid = sc.map.grid();
        let (row, col) = grid.cell_at(sc.operator).unwrap();
        assert!(grid.is_free(row, col), "{}", sc.id);
    }
}
