use super::*;
use crate::volume::GridSpec;
use ndarray::{s, Array3};
use proptest::prelude::*;

fn vol(data: Array3<f32>) -> Volume {
    let (x, y, z) = data.dim();
    Volume::new(GridSpec::isotropic([x, y, z]), data).unwrap()
}

/// Triple-loop mean along the ray for RAS grids.
fn mean_oracle(data: &Array3<f32>, mask: &Array3<bool>, view: View, empty: f64) -> Array2<f64> {
    let (nx, ny, nz) = data.dim();
    let (rows, cols) = match view {
        View::Frontal => (nz, nx),
        View::Lateral => (nz, ny),
    };
    let mut out = Array2::zeros((rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            let z = nz - 1 - r;
            let (mut sum, mut n) = (0.0, 0);
            let len = if view == View::Frontal { ny } else { nx };
            for k in 0..len {
                let p = if view == View::Frontal { [c, k, z] } else { [k, c, z] };
                if mask[p] {
                    sum += data[p] as f64;
                    n += 1;
                }
            }
            out[[r, c]] = if n == 0 { empty } else { sum / n as f64 };
        }
    }
    out
}

fn arb_volume(n: usize) -> impl Strategy<Value = Array3<f32>> {
    prop::collection::vec(-1024i32..=3071, n * n * n)
        .prop_map(move |v| Array3::from_shape_vec((n, n, n), v.into_iter().map(|x| x as f32).collect()).unwrap())
}

fn arb_mask(n: usize) -> impl Strategy<Value = Array3<bool>> {
    prop::collection::vec(prop::bool::weighted(0.4), n * n * n).prop_map(move |v| Array3::from_shape_vec((n, n, n), v).unwrap())
}

#[test]
fn mean_of_constant_volume_is_the_constant() {
    let v = vol(Array3::from_elem((5, 6, 7), 123.0));
    let full = Array3::from_elem((5, 6, 7), true);
    for view in View::BOTH {
        let img = project_mean(&v, view, &full, -1024.0).unwrap();
        assert!(img.iter().all(|&p| p == 123.0));
    }
    assert_eq!(project_mean(&v, View::Frontal, &full, 0.0).unwrap().dim(), (7, 5));
    assert_eq!(project_mean(&v, View::Lateral, &full, 0.0).unwrap().dim(), (7, 6));
}

#[test]
fn two_voxel_ray_averages() {
    let mut data = Array3::from_elem((1, 2, 1), 0.0);
    data[[0, 0, 0]] = -1000.0;
    let img = project_mean(&vol(data), View::Frontal, &Array3::from_elem((1, 2, 1), true), -1024.0).unwrap();
    assert_eq!(img[[0, 0]], -500.0);
}

#[test]
fn empty_rays_get_the_fill_value() {
    let v = vol(Array3::from_elem((3, 3, 3), 50.0));
    let mut mask = Array3::from_elem((3, 3, 3), false);
    mask[[1, 1, 1]] = true;
    let img = project_mean(&v, View::Frontal, &mask, -1024.0).unwrap();
    assert_eq!(img[[1, 1]], 50.0);
    assert_eq!(img.iter().filter(|&&p| p == -1024.0).count(), 8);
}

#[test]
fn permuted_orientation_projects_the_same_anatomy() {
    let data = Array3::from_shape_fn((4, 5, 6), |(x, y, z)| (x * 100 + y * 10 + z) as f32);
    let ras = vol(data.clone());
    // Store the same anatomy as (axial, sagittal, coronal).
    let permuted = data.view().permuted_axes([2, 0, 1]).to_owned();
    let orientation = Orientation::new([AxisRole::Axial, AxisRole::Sagittal, AxisRole::Coronal]).unwrap();
    let grid = GridSpec::new([6, 4, 5], [1.0; 3], orientation).unwrap();
    let other = Volume::new(grid, permuted).unwrap();
    for view in View::BOTH {
        let a = project_mean(&ras, view, &Array3::from_elem((4, 5, 6), true), 0.0).unwrap();
        let b = project_mean(&other, view, &Array3::from_elem((6, 4, 5), true), 0.0).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_matches_loop_oracle(data in arb_volume(8), mask in arb_mask(8)) {
        let v = vol(data.clone());
        for view in View::BOTH {
            let got = project_mean(&v, view, &mask, -1024.0).unwrap();
            let want = mean_oracle(&data, &mask, view, -1024.0);
            for (g, w) in got.iter().zip(want.iter()) {
                prop_assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mean_projection_is_linear(a in arb_volume(6), b in arb_volume(6), mask in arb_mask(6),
                                 ka in -12i32..=12, kb in -12i32..=12) {
        // Quarter-step weights keep the combined volume exact in f32.
        let (alpha, beta) = (ka as f64 / 4.0, kb as f64 / 4.0);
        let combo = Zip::from(&a).and(&b).map_collect(|&x, &y| (alpha * x as f64 + beta * y as f64) as f32);
        let pa = project_mean(&vol(a), View::Frontal, &mask, 0.0).unwrap();
        let pb = project_mean(&vol(b), View::Frontal, &mask, 0.0).unwrap();
        let pc = project_mean(&vol(combo), View::Frontal, &mask, 0.0).unwrap();
        for ((c, x), y) in pc.iter().zip(pa.iter()).zip(pb.iter()) {
            let want = alpha * x + beta * y;
            prop_assert!((c - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn mask_projection_commutes_with_union(a in arb_mask(7), b in arb_mask(7)) {
        let grid = GridSpec::isotropic([7, 7, 7]);
        let union = Zip::from(&a).and(&b).map_collect(|&x, &y| x || y);
        let mut labels = LabelVolume::new(grid);
        labels.insert_dense("a", &a).unwrap();
        labels.insert_dense("b", &b).unwrap();
        labels.insert_dense("u", &union).unwrap();
        for view in View::BOTH {
            let set = project_masks_native(&labels, view);
            let (pa, pb, pu) = (set.get("a").unwrap(), set.get("b").unwrap(), set.get("u").unwrap());
            prop_assert_eq!(pu, &Zip::from(pa).and(pb).map_collect(|&x, &y| x || y));
            prop_assert!(Zip::from(pa).and(pu).all(|&x, &u| !x || u));
        }
    }

    #[test]
    fn projected_area_covers_every_slice_footprint(a in arb_mask(6)) {
        let mut labels = LabelVolume::new(GridSpec::isotropic([6, 6, 6]));
        labels.insert_dense("a", &a).unwrap();
        let set = project_masks_native(&labels, View::Frontal);
        let area = set.get("a").unwrap().iter().filter(|&&v| v).count();
        for y in 0..6 {
            let slice = a.slice(s![.., y, ..]);
            prop_assert!(area >= slice.iter().filter(|&&v| v).count());
        }
    }
}

#[test]
fn single_slice_mask_projects_to_its_footprint() {
    let mut a = Array3::from_elem((5, 4, 3), false);
    a[[1, 2, 0]] = true;
    a[[3, 2, 2]] = true;
    let mut labels = LabelVolume::new(GridSpec::isotropic([5, 4, 3]));
    labels.insert_dense("a", &a).unwrap();
    labels.insert_dense("empty", &Array3::from_elem((5, 4, 3), false)).unwrap();
    let set = project_masks_native(&labels, View::Frontal);
    let fp = set.get("a").unwrap();
    assert_eq!(fp.dim(), (3, 5));
    assert!(fp[[2, 1]] && fp[[0, 3]]);
    assert_eq!(fp.iter().filter(|&&v| v).count(), 2);
    assert!(set.get("empty").unwrap().iter().all(|&v| !v));

    let resized = project_masks(&labels, View::Lateral, (8, 6)).unwrap();
    assert_eq!(resized.dims(), (6, 8));
    assert_eq!(resized.view(), View::Lateral);
}

/// Water cylinder along the axial axis in air.
fn cylinder(n: usize, radius: f64) -> (Array3<f32>, Array3<bool>) {
    let c = (n as f64 - 1.0) / 2.0;
    let inside = Array3::from_shape_fn((n, n, n), |(x, y, _)| {
        let (dx, dy) = (x as f64 - c, y as f64 - c);
        dx * dx + dy * dy <= radius * radius
    });
    (inside.mapv(|b| if b { 0.0 } else { -1000.0 }), inside)
}

#[test]
fn body_mask_is_the_cylinder() {
    let (data, inside) = cylinder(24, 8.0);
    assert_eq!(body_mask(&vol(data), -100.0).unwrap(), inside);
}

#[test]
fn body_mask_drops_a_detached_table() {
    let (mut data, inside) = cylinder(24, 8.0);
    data.slice_mut(s![2..22, 0..2, ..]).fill(200.0);
    assert_eq!(body_mask(&vol(data), -100.0).unwrap(), inside);
}

#[test]
fn body_mask_fills_internal_air() {
    let (mut data, inside) = cylinder(24, 8.0);
    data.slice_mut(s![10..13, 10..13, ..]).fill(-900.0);
    assert_eq!(body_mask(&vol(data), -100.0).unwrap(), inside);
}

#[test]
fn all_air_is_degenerate() {
    let err = body_mask(&vol(Array3::from_elem((4, 4, 4), -1000.0)), -100.0).unwrap_err();
    assert_eq!(err.code(), "degenerate");
}

#[test]
fn bone_is_the_dense_set() {
    let (mut data, inside) = cylinder(24, 8.0);
    data.mapv_inplace(|v| if v == 0.0 { 40.0 } else { v });
    data.slice_mut(s![10..13, 10..13, 3..20]).fill(700.0);
    let v = vol(data.clone());
    let bone = bone_volume(&v, &inside, &GhtParams::OTSU, HuWindow::default()).unwrap();
    Zip::from(bone.data()).and(&data).for_each(|&b, &d| {
        assert_eq!(b, if d == 700.0 { 700.0 } else { -1024.0 });
    });
}

#[test]
fn uniform_slices_and_outside_voxels_are_never_bone() {
    let (mut data, inside) = cylinder(16, 5.0);
    data.mapv_inplace(|v| if v == 0.0 { 40.0 } else { v });
    // Metal outside the body.
    data[[0, 0, 4]] = 3000.0;
    let bone = bone_volume(&vol(data), &inside, &GhtParams::OTSU, HuWindow::default()).unwrap();
    assert!(bone.data().iter().all(|&b| b == -1024.0));
}

#[test]
fn drr_has_configured_shape_and_zero_bone_weight_is_neutral_without_bone() {
    // Soft tissue that varies only along the axial axis: every slice is uniform.
    let (mut data, _) = cylinder(24, 8.0);
    data.slice_mut(s![.., .., 9..12]).mapv_inplace(|v| if v == 0.0 { 60.0 } else { v });
    let v = vol(data);
    let mut cfg = ProjectionConfig {
        output_size: (40, 30),
        ..Default::default()
    };
    let with_bone = compose_drr(&v, &cfg, View::Frontal).unwrap();
    cfg.bone_weight = 0.0;
    let without = compose_drr(&v, &cfg, View::Frontal).unwrap();
    assert_eq!(with_bone.image.dim(), (30, 40));
    assert!(with_bone.equalized);
    assert_eq!(with_bone.image, without.image);
}

#[test]
fn constant_body_renders_black() {
    let v = vol(Array3::from_elem((10, 10, 10), 40.0));
    let cfg = ProjectionConfig {
        output_size: (16, 16),
        equalize_frontal: false,
        ..Default::default()
    };
    let p = compose_drr(&v, &cfg, View::Frontal).unwrap();
    assert!(p.image.iter().all(|&g| g == 0));
}

#[test]
fn dense_rod_casts_a_brighter_column() {
    let n = 32;
    let mut data = Array3::from_elem((n, n, n), 40.0f32);
    data.slice_mut(s![15..17, 15..17, ..]).fill(1200.0);
    let cfg = ProjectionConfig {
        output_size: (n, n),
        equalize_frontal: false,
        ..Default::default()
    };
    let img = compose_drr(&vol(data), &cfg, View::Frontal).unwrap().image;
    let col_mean = |c: usize| img.column(c).iter().map(|&g| g as f64).sum::<f64>() / n as f64;
    let rod = col_mean(15).min(col_mean(16));
    for c in (0..n).filter(|c| !(12..20).contains(c)) {
        assert!(rod > col_mean(c), "column {c}");
    }
}

#[test]
fn rescale_maps_extremes_to_the_full_range() {
    let img = Array2::from_shape_vec((1, 3), vec![-5.0, 0.0, 5.0]).unwrap();
    assert_eq!(rescale_u8(&img).into_raw_vec_and_offset().0, vec![0, 128, 255]);
}

#[test]
fn png_encoding_round_trips() {
    let img = Array2::from_shape_fn((5, 7), |(r, c)| (r * 40 + c) as u8);
    let bytes = gray_png(&img).unwrap();
    let decoded = image::load_from_memory(&bytes).unwrap().to_luma8();
    assert_eq!((decoded.width(), decoded.height()), (7, 5));
    assert_eq!(decoded.into_raw(), img.iter().copied().collect::<Vec<_>>());
}
