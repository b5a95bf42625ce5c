mod common;

use cardioflux::ingest::{
    degrade_to_device, read_activity, resample_align, write_activity, Channel, DeviceProfile, ResampleOptions,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_csv_round_trip_is_bit_exact(s in common::stream(300, false)) {
        let mut first = Vec::new();
        write_activity(&s, &mut first).unwrap();
        let parsed = read_activity(first.as_slice(), "p", 8).unwrap();
        prop_assert_eq!(&parsed, &s);
        for (a, b) in parsed.samples.iter().zip(&s.samples) {
            for c in Channel::ALL {
                prop_assert_eq!(a.get(c).map(f64::to_bits), b.get(c).map(f64::to_bits));
            }
        }
        let mut second = Vec::new();
        write_activity(&parsed, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn resample_is_one_hz_and_idempotent(s in common::stream(400, false)) {
        let opts = ResampleOptions { min_duration_s: 10, ..ResampleOptions::default() };
        let Ok(once) = resample_align(&s, &opts) else { return Ok(()) };
        prop_assert!(once.stream.is_one_hz());
        let twice = resample_align(&once.stream, &opts).unwrap();
        prop_assert_eq!(&twice.stream, &once.stream);
        prop_assert!(twice.report.split_gaps.is_empty());
    }

    #[test]
    fn degrading_keeps_retained_values(s in common::stream(200, true), device in 1u8..=8) {
        let profile = DeviceProfile::builtin(device).unwrap();
        let d = degrade_to_device(&s, &profile).unwrap();
        let kept = profile.sample_channels();
        prop_assert_eq!(d.samples.len(), s.samples.len());
        for (a, b) in d.samples.iter().zip(&s.samples) {
            prop_assert_eq!(a.timestamp, b.timestamp);
            for c in Channel::ALL {
                if kept.contains(&c) {
                    prop_assert_eq!(a.get(c), b.get(c));
                } else {
                    prop_assert_eq!(a.get(c), None);
                }
            }
        }
    }
}
