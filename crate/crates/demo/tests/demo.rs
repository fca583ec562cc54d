use std::collections::HashMap;

use tweetscape_demo::{frame_info, smoothing_profile, stack_corpus};

#[test]
fn frame_matches_campus_bounds() {
    let info = frame_info();
    assert!((info[0] - 739.5598053056852).abs() < 1e-6);
    assert!((info[1] - 778.3644865116773).abs() < 1e-6);
    assert_eq!(&info[2..], &[42.350, -71.099, 42.357, -71.090]);
}

#[test]
fn projection_round_trips() {
    let xy = tweetscape_demo::project(42.3535, -71.0945).unwrap();
    let back = tweetscape_demo::unproject(xy[0], xy[1]).unwrap();
    assert!((back[0] - 42.3535).abs() < 1e-9 && (back[1] + 71.0945).abs() < 1e-9);
    assert_eq!(tweetscape_demo::project(42.350, -71.099).unwrap(), [0.0, 0.0]);
}

#[test]
fn smoothing_flattens_the_profile_but_keeps_its_ends() {
    let (raw, smooth) = smoothing_profile(3, 5, 0.5).unwrap();
    assert_eq!(raw.len(), smooth.len());
    let roughness = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    assert!(roughness(&smooth) < roughness(&raw));
    assert_eq!(raw[0], smooth[0]);
    assert_eq!(raw.last(), smooth.last());

    assert!(smoothing_profile(3, 0, 0.5).is_err());
    assert!(smoothing_profile(3, 1, 1.5).is_err());
}

#[test]
fn stacks_are_gapless_columns() {
    let markers = stack_corpus(1_500, 9, 2.0).unwrap();
    assert_eq!(markers.len(), 1_500);
    assert!(markers.iter().any(|m| m.alert));

    let mut columns: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    for m in &markers {
        let key = ((m.x / 2.0).floor() as i64, (m.y / 2.0).floor() as i64);
        columns.entry(key).or_default().push(m.stack_index);
        assert_eq!(m.z, 0.5 + m.stack_index as f64);
    }
    for indices in columns.values_mut() {
        indices.sort();
        assert!(indices.iter().enumerate().all(|(i, &s)| s as usize == i));
    }
    assert!(columns.values().any(|c| c.len() > 1), "hotspots should stack");
    assert!(stack_corpus(10, 1, 0.0).is_err());
}
