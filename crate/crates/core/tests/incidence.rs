use frb_core::incidence::{BinaryIncidenceMatrix, IncidenceError};
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = BinaryIncidenceMatrix> {
    (1usize..=40, 1usize..=70).prop_flat_map(|(n, theta)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), theta), n).prop_map(
            move |bits| {
                let rows = bits.iter().map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|p| *p.1)
                        .map(|p| p.0)
                        .collect::<Vec<_>>()
                });
                BinaryIncidenceMatrix::from_row_supports(n, theta, rows).unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_and_json_round_trip(m in matrix_strategy()) {
        prop_assert_eq!(&BinaryIncidenceMatrix::read_text(&m.write_text()).unwrap(), &m);
        prop_assert_eq!(&BinaryIncidenceMatrix::read_json(&m.write_json()).unwrap(), &m);
        prop_assert!(m.is_consistent());
    }

    #[test]
    fn transpose_is_an_involution(m in matrix_strategy()) {
        let t = m.transpose();
        prop_assert_eq!((t.n(), t.theta()), (m.theta(), m.n()));
        for i in 0..m.n() {
            prop_assert_eq!(t.col_support(i), m.row_support(i));
        }
        prop_assert_eq!(t.transpose(), m);
    }

    #[test]
    fn cover_is_bounded_by_weights(m in matrix_strategy(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..8)) {
        let cols: Vec<usize> = picks.iter().map(|p| p.index(m.theta())).collect();
        let cover = m.cover_rows(&cols).unwrap();
        let weight_sum: usize = cols.iter().map(|&j| m.col_weight(j)).sum();
        prop_assert!(cover.count() <= weight_sum.min(m.n()));
        for &j in &cols {
            prop_assert!(m.col_support(j).is_subset(&cover));
        }
        // columns inside the cover include every chosen column
        let inside = m.cols_inside(&cover);
        for &j in &cols {
            prop_assert!(inside.contains(j));
        }
    }
}

#[test]
fn parse_errors_carry_position() {
    match BinaryIncidenceMatrix::read_text("2 3\n010\n0x1\n") {
        Err(IncidenceError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
        other => panic!("{other:?}"),
    }
    assert!(BinaryIncidenceMatrix::read_text("2 3\n010\n").is_err());
    assert!(BinaryIncidenceMatrix::read_text("2 3\n010\n0101\n").is_err());
    assert!(BinaryIncidenceMatrix::read_json("{\"n\":1}").is_err());
    assert!(matches!(
        BinaryIncidenceMatrix::identity(3).cover_rows(&[3]),
        Err(IncidenceError::IndexOutOfRange { index: 3, limit: 3 })
    ));
}

#[test]
fn identity_matrix() {
    let m = BinaryIncidenceMatrix::identity(4);
    assert_eq!(m.write_text(), "4 4\n1000\n0100\n0010\n0001\n");
    let w = m.weights();
    assert_eq!((w.alpha, w.rho), (Some(1), Some(1)));
}
