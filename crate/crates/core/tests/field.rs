use std::fs::File;
use std::io::{BufReader, BufWriter};

use approx::assert_relative_eq;
use bimeron::field::io::{read_binary, write_binary, write_csv};
use bimeron::field::{apply_symmetry, sample, Director, Field, GridSpec, MobiusParams, Symmetry};
use bimeron::Error;
use num_complex::Complex;

fn mobius_field(n: usize) -> Field<f64> {
    let p = MobiusParams::new(Complex::new(0.2, -0.1), 0.7, 0.3, 0.4, 0.1).unwrap();
    sample(|z| p.eval(z), GridSpec::new(3.0, n).unwrap())
}

#[test]
fn binary_file_round_trip_is_bit_exact() {
    let f = mobius_field(33);
    let path = std::env::temp_dir().join(format!("bimeron_field_{}.bmf", std::process::id()));
    write_binary(&f, BufWriter::new(File::create(&path).unwrap())).unwrap();
    let len = std::fs::metadata(&path).unwrap().len();
    assert_eq!(len, 4 + 4 + 8 + 24 * 33 * 33);
    let g: Field<f64> = read_binary(BufReader::new(File::open(&path).unwrap())).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(g, f);
}

#[test]
fn binary_reader_rejects_bad_input() {
    let f = mobius_field(5);
    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    let mut extra = buf.clone();
    extra.push(0);
    assert!(matches!(read_binary::<f64, _>(&extra[..]), Err(Error::Format(_))));
    assert!(matches!(read_binary::<f64, _>(&buf[..buf.len() - 1]), Err(Error::Format(_))));
    let mut scaled = buf.clone();
    scaled[16..24].copy_from_slice(&2.0f64.to_le_bytes());
    assert!(read_binary::<f64, _>(&scaled[..]).is_err());
}

#[test]
fn csv_lists_every_node_row_major() {
    let f = mobius_field(4);
    let mut out = Vec::new();
    write_csv(&f, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,mx,my,mz");
    assert_eq!(lines.len(), 1 + 16);
    let second: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(second[0], -1.0);
    assert_eq!(second[1], -3.0);
    let d = f.at(1, 0);
    assert_eq!(&second[2..], &[d.x, d.y, d.z]);
}

#[test]
fn node_translations_commute_with_sampling() {
    let base = MobiusParams::new(Complex::new(0.0, 0.0), 0.7, 0.0, 0.0, 0.0).unwrap();
    let g = GridSpec::new(3.0, 31).unwrap();
    let shift = Complex::new(0.4, -0.2);
    let moved = apply_symmetry(&sample(|z| base.eval(z), g), Symmetry::Translation(shift));
    let direct = sample(|z| base.eval(z - shift), g);
    let n = g.n();
    for j in 0..n - 1 {
        for i in 2..n {
            assert!(moved.at(i, j).max_abs_diff(direct.at(i, j)) < 1e-12);
        }
    }
}

#[test]
fn interpolation_matches_nodes_and_stays_unit() {
    let f = mobius_field(21);
    let g = *f.grid();
    assert!(f.interpolate(g.point(7, 12)).max_abs_diff(f.at(7, 12)) < 1e-15);
    let between = f.interpolate(Complex::new(0.123, -0.456));
    assert_relative_eq!(between.norm_sqr(), 1.0, max_relative = 1e-14);
}

#[test]
fn fields_reject_non_unit_values() {
    let g = GridSpec::new(1.0, 3).unwrap();
    let v = vec![Director::from_raw(1.0, 1.0, 0.0); 9];
    assert!(Field::from_values(g, v.clone()).is_err());
    let f = Field::from_vectors(g, v).unwrap();
    assert!(f.max_norm_defect() < 1e-15);
    assert!(Field::from_values(g, vec![Director::e3(); 8]).is_err());
}
