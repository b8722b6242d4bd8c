use proptest::prelude::*;

use snnd_core::artifact::{
    ArtifactFlags, Violation, ENCODABLE_NEURONS, ENCODABLE_SYNAPSES, EXECUTABLE_NEURONS, MAX_EXECUTABLE_TIME_WINDOW,
};
use snnd_core::model::{build_sequential, export};
use snnd_core::{
    read_artifact, validate_artifact, write_artifact, EncoderConfig, Error, LayerSpec, NetworkSpecF32, NeuronConfig,
    ValidationLevel,
};

fn dense_net(inputs: usize, outputs: usize, classes: u32, w: impl Fn(usize) -> f32) -> NetworkSpecF32 {
    build_sequential(
        vec![LayerSpec::linear(inputs, outputs, (0..inputs * outputs).map(w).collect()), LayerSpec::lif(outputs)],
        NeuronConfig::ttfs(vec![1.0; outputs]),
        EncoderConfig::default(),
    )
    .unwrap()
    .with_num_classes(classes)
}

fn small_net() -> impl Strategy<Value = NetworkSpecF32> {
    (1usize..12, 1usize..4, 1usize..4, 2u32..32, 1u32..5).prop_flat_map(|(inputs, classes, group, window, den)| {
        let outputs = classes * group;
        (
            prop::collection::vec(prop_oneof![Just(0.0f32), -1.0f32..1.0], inputs * outputs),
            prop::collection::vec(0.2f32..3.0, outputs),
            0..=den,
        )
            .prop_map(move |(mut w, th, num)| {
                // Keeps the weight scale comparable to the thresholds.
                w[0] = 1.0;
                build_sequential(
                    vec![LayerSpec::linear(inputs, outputs, w), LayerSpec::lif(outputs)],
                    NeuronConfig::ttfs(th).with_leak(num, den),
                    EncoderConfig::with_time_window(window),
                )
                .unwrap()
                .with_num_classes(classes as u32)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn round_trip_is_byte_identical(net in small_net()) {
        let a = export(&net).unwrap();
        let mut bytes = Vec::new();
        write_artifact(&a, &mut bytes).unwrap();
        let back = read_artifact(bytes.as_slice()).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn every_single_byte_flip_is_rejected(net in small_net(), flip in 1u8..=255) {
        let bytes = export(&net).unwrap().to_bytes();
        for pos in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[pos] ^= flip;
            prop_assert!(read_artifact(bad.as_slice()).is_err(), "flip at {} accepted", pos);
        }
    }
}

#[test]
fn body_mutation_reports_corruption() {
    let a = export(&dense_net(4, 2, 2, |i| i as f32 - 3.0)).unwrap();
    let mut bytes = a.to_bytes();
    let last_weight = bytes.windows(4).position(|w| w == b"THRS").unwrap() - 1;
    bytes[last_weight] ^= 0x01;
    match read_artifact(bytes.as_slice()) {
        Err(Error::Corruption { .. }) => {}
        other => panic!("expected corruption, got {other:?}"),
    }
}

#[test]
fn executable_neuron_boundary() {
    let at = export(&dense_net(1024, EXECUTABLE_NEURONS as usize - 1024, 8, |i| (i % 7 == 0) as u8 as f32)).unwrap();
    assert!(at.header.flags.contains(ArtifactFlags::EXECUTABLE));
    assert!(validate_artifact(&at, ValidationLevel::Executable).is_valid());

    let over = export(&dense_net(1025, EXECUTABLE_NEURONS as usize - 1024, 8, |i| (i % 7 == 0) as u8 as f32)).unwrap();
    assert!(!over.header.flags.contains(ArtifactFlags::EXECUTABLE));
    assert!(validate_artifact(&over, ValidationLevel::Encodable).is_valid());
    let report = validate_artifact(&over, ValidationLevel::Executable);
    assert!(report.violations.iter().any(|v| matches!(v, Violation::TooManyNeurons { limit, .. } if *limit == EXECUTABLE_NEURONS)));
}

#[test]
fn encodable_neuron_boundary() {
    let outputs = 150;
    let at = export(&dense_net(ENCODABLE_NEURONS as usize - outputs, outputs, 10, |i| (i % 3) as f32)).unwrap();
    assert_eq!(at.header.total_neurons, ENCODABLE_NEURONS);
    match export(&dense_net(ENCODABLE_NEURONS as usize - outputs + 1, outputs, 10, |i| (i % 3) as f32)) {
        Err(Error::Validation(r)) => assert!(r.violations.iter().any(|v| matches!(v, Violation::TooManyNeurons { .. }))),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn encodable_synapse_boundary() {
    // 1000 x 844 = 844,000 weights; zero out the surplus.
    let (inputs, outputs) = (1000, 844);
    let zeros = inputs * outputs - ENCODABLE_SYNAPSES;
    let at = export(&dense_net(inputs, outputs, 4, |i| if i < zeros { 0.0 } else { 1.0 })).unwrap();
    assert_eq!(at.connectivity.synapses.len(), ENCODABLE_SYNAPSES);
    assert!(validate_artifact(&at, ValidationLevel::Encodable).is_valid());

    match export(&dense_net(inputs, outputs, 4, |i| if i < zeros - 1 { 0.0 } else { 1.0 })) {
        Err(Error::Validation(r)) => {
            assert!(r.violations.contains(&Violation::TooManySynapses { count: ENCODABLE_SYNAPSES + 1, limit: ENCODABLE_SYNAPSES }))
        }
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn time_window_boundary() {
    let mut net = dense_net(4, 2, 2, |_| 1.0);
    net.encoder = EncoderConfig::with_time_window(MAX_EXECUTABLE_TIME_WINDOW);
    assert!(export(&net).unwrap().header.flags.contains(ArtifactFlags::EXECUTABLE));
    net.encoder = EncoderConfig::with_time_window(MAX_EXECUTABLE_TIME_WINDOW + 1);
    let a = export(&net).unwrap();
    assert!(!a.header.flags.contains(ArtifactFlags::EXECUTABLE));
}

#[test]
fn stale_digest_after_edit() {
    let mut a = export(&dense_net(3, 2, 1, |_| 0.7)).unwrap();
    a.thresholds.values[0] += 1;
    assert!(validate_artifact(&a, ValidationLevel::Encodable).violations.contains(&Violation::StaleDigest));
    let a = a.seal();
    assert!(validate_artifact(&a, ValidationLevel::Executable).is_valid());
}
