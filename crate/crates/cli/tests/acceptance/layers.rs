use dronecine_core::scan::{layer_heights, plan_scan, ScanArea, ScanConfig};
use proptest::prelude::*;

use crate::support::check;

pub fn run() {
    let defaults = ScanConfig::default();
    assert_eq!(defaults.base_height, 20.0);
    assert_eq!(defaults.gimbal_pitch_per_layer, [85.0, 60.0, 35.0]);

    // lowest layer looks most obliquely
    let config = ScanConfig {
        avg_building_height: 6.0,
        max_building_height: 15.0,
        ..ScanConfig::default()
    };
    let plan = plan_scan(&ScanArea::square(12.0), &config).unwrap();
    let by_height: Vec<(f64, f64)> = plan.layers.iter().map(|l| (l.height, l.gimbal_pitch)).collect();
    assert_eq!(by_height, vec![(20.0, 35.0), (26.0, 60.0), (35.0, 85.0)]);

    let configs = (
        1.0..200.0f64,
        0.0..80.0f64,
        0.0..80.0f64,
        prop::array::uniform3(-30.0..=90.0f64),
    );
    check(100, configs, |(h, avg, extra, pitches)| {
        let max = avg + extra;
        let config = ScanConfig {
            base_height: h,
            avg_building_height: avg,
            max_building_height: max,
            in_track_overlap: 0.3,
            cross_track_overlap: 0.3,
            gimbal_pitch_per_layer: pitches,
            ..ScanConfig::default()
        };
        prop_assert_eq!(layer_heights(&config), [h, h + avg, h + max]);
        let plan = plan_scan(&ScanArea::square(10.0), &config).unwrap();
        let got: Vec<(f64, f64)> = plan.layers.iter().map(|l| (l.height, l.gimbal_pitch)).collect();
        prop_assert_eq!(got, vec![(h, pitches[2]), (h + avg, pitches[1]), (h + max, pitches[0])]);
        Ok(())
    });
}
