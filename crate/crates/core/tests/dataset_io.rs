use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use regparam::experiments::data::DataModel;
use regparam::experiments::io::{dataset_to_string, parse_dataset, read_dataset, write_dataset};
use regparam::experiments::Dataset;
use regparam::operators::{ConvolutionOperator, DenseOperator, ForwardOperator, LinearOperator};
use regparam::param_select::TrainingSet;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn pairs(n: usize, ydim: usize, xdim: usize) -> impl Strategy<Value = Vec<(DVector<f64>, DVector<f64>)>> {
    prop::collection::vec(
        (
            prop::collection::vec(finite(), ydim).prop_map(DVector::from_vec),
            prop::collection::vec(finite(), xdim).prop_map(DVector::from_vec),
        ),
        n,
    )
}

fn assert_same(a: &Dataset, b: &Dataset) {
    assert_eq!(a.model, b.model);
    assert_eq!(a.operator.to_dense(), b.operator.to_dense());
    assert_eq!(a.data.pairs(), b.data.pairs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_round_trip(entries in prop::collection::vec(finite(), 6), data in pairs(3, 3, 2), seed in any::<u64>()) {
        let ds = Dataset {
            model: DataModel::SpectralSource { d: 2, s: 0.5, tau: 0.01, operator_seed: seed },
            operator: ForwardOperator::Dense(DenseOperator::new(DMatrix::from_vec(3, 2, entries))),
            data: TrainingSet::new(data).unwrap(),
        };
        let back = parse_dataset(&dataset_to_string(&ds).unwrap()).unwrap();
        assert_same(&ds, &back);
    }

    #[test]
    fn convolution_round_trip(kernel in prop::collection::vec(-1.0..1.0f64, 5), origin in 0usize..5, data in pairs(2, 5, 5)) {
        let ds = Dataset {
            model: DataModel::SparseDeblur { d: 5, sparsity: 1, tau: 0.1 },
            operator: ForwardOperator::Convolution(ConvolutionOperator::with_origin(DVector::from_vec(kernel), origin).unwrap()),
            data: TrainingSet::new(data).unwrap(),
        };
        let text = dataset_to_string(&ds).unwrap();
        let back = parse_dataset(&text).unwrap();
        assert_same(&ds, &back);
        prop_assert_eq!(dataset_to_string(&back).unwrap(), text);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("ds.txt");
    let ds = Dataset {
        model: DataModel::SparseDenoise { d: 3, sparsity: 1, tau: 0.25 },
        operator: ForwardOperator::identity(3),
        data: TrainingSet::new(vec![(
            DVector::from_vec(vec![0.1, -0.2, 0.3]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        )])
        .unwrap(),
    };
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    write_dataset(&path, &ds).unwrap();
    assert_same(&ds, &read_dataset(&path).unwrap());
}

#[test]
fn rejects_mismatched_pair_count() {
    let text = "regparam-dataset v1\nmodel denoise d=2 sparsity=1 tau=0.1\noperator identity 2\npairs 2 2 2\ny 1 2\nx 1 2\n";
    assert!(parse_dataset(text).is_err());
}
