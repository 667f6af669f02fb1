use bubblescope::core::PriceSeries;
use bubblescope::series::{from_json, parse_csv, to_csv, to_json};
use proptest::prelude::*;

fn series() -> impl Strategy<Value = PriceSeries> {
    (prop::collection::vec((1e-6f64..10.0, 1e-8f64..1e8), 2..60), 0.0f64..1e4).prop_map(|(steps, t0)| {
        let mut t = t0;
        let (times, prices): (Vec<f64>, Vec<f64>) = steps
            .into_iter()
            .map(|(dt, p)| {
                t += dt;
                (t, p)
            })
            .unzip();
        PriceSeries::new(times, prices, "prop").unwrap()
    })
}

proptest! {
    #[test]
    fn json_round_trip(s in series()) {
        prop_assert_eq!(from_json(&to_json(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn csv_round_trip(s in series()) {
        prop_assert_eq!(parse_csv(&to_csv(&s), "prop").unwrap(), s);
    }
}
