use ct2cxr::imgops::GhtParams;
use ct2cxr::View;
use ct2cxr_web::{Scene, IMAGE_SIDE};

#[test]
fn ctr_tracks_heart_width() {
    let small = Scene::new(64, 40.0, 0.0).unwrap().ctr().unwrap().ctr;
    let large = Scene::new(64, 80.0, 0.0).unwrap().ctr().unwrap().ctr;
    assert!(large > small + 0.1, "{small} vs {large}");
}

#[test]
fn scd_grows_with_scoliosis() {
    let straight = Scene::new(64, 50.0, 0.0).unwrap().scd().unwrap().scd;
    let bent = Scene::new(64, 50.0, 8.0).unwrap().scd().unwrap().scd;
    assert!(straight < 0.5 && bent > straight, "{straight} vs {bent}");
}

#[test]
fn images_have_the_advertised_size() {
    let mut s = Scene::new(48, 50.0, 0.0).unwrap();
    for view in View::BOTH {
        assert_eq!(s.radiograph(view, 0.3, true).unwrap().dim(), (IMAGE_SIDE, IMAGE_SIDE));
    }
    let overlay = s.overlay(0.3, true).unwrap();
    assert_eq!(overlay.dim(), (IMAGE_SIDE, IMAGE_SIDE));
    assert!(overlay.iter().any(|p| p[0] != p[1]), "overlay has colour");
}

#[test]
fn bone_weight_changes_the_radiograph() {
    let mut s = Scene::new(48, 50.0, 0.0).unwrap();
    let a = s.radiograph(View::Frontal, 0.0, false).unwrap();
    let b = s.radiograph(View::Frontal, 1.0, false).unwrap();
    assert_ne!(a, b);
    assert_eq!(s.radiograph(View::Frontal, 0.0, false).unwrap(), a);
}

#[test]
fn otsu_threshold_separates_bone_in_a_spine_slice() {
    let s = Scene::new(64, 50.0, 0.0).unwrap();
    let spec = ct2cxr::phantom::PhantomSpec::standard(64);
    let z = spec.spine.z_range(5);
    let (t, img) = s.threshold_slice(((z[0] + z[1]) / 2.0) as usize, &GhtParams::OTSU).unwrap();
    assert!(t > spec.hu.soft_tissue as f64 && t <= spec.hu.vertebra as f64, "threshold {t}");
    assert_eq!(img.dim(), (64, 64));
    assert!(s.threshold_slice(10_000, &GhtParams::OTSU).is_ok());
}
