use permball::asym::{gap_curve_table, open_grid, GapCurvePoint, GapPair};
use permball::bounds::{finite_bounds, BoundRecord};
use permball::rates::{ecc_grid, rate_table, RateKind, RateMode, RateRecord};
use permball::BallSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).unwrap();
    }
    let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
    let back: Vec<T> = csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(back, rows);
    text
}

#[test]
fn bound_records() {
    let rows: Vec<BoundRecord> = finite_bounds(BallSpec::new(9, 3).unwrap()).iter().map(|b| b.record()).collect();
    let text = round_trip(&rows);
    assert!(text.starts_with("family,direction,n,r,bits,valid\n"));
    assert!(text.contains("Phi1,upper,9,3,"));
}

#[test]
fn gap_points() {
    let table = gap_curve_table(&GapPair::ALL, &open_grid(0.05).unwrap()).unwrap();
    let text = round_trip::<GapCurvePoint>(&table.points);
    assert!(text.starts_with("pair,rho,gap_bits\n"));
}

#[test]
fn rate_records() {
    let kinds = [RateKind::EccOld, RateKind::EccNew];
    let rows: Vec<RateRecord> =
        rate_table(&kinds, &ecc_grid(0.1).unwrap(), RateMode::Asymptotic).iter().map(|p| p.record()).collect();
    let text = round_trip(&rows);
    assert!(text.starts_with("kind,x,rate_bits,mode,n\n"));
    assert!(text.lines().nth(1).unwrap().ends_with(",asymptotic,"));
}
