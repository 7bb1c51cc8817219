use geosphere::formats::{
    decode_isop, decode_isph, encode_isop, encode_isph, format_kernel, parse_kernel, write_off,
    write_pattern_csv, write_tissot_csv, TISSOT_CSV_HEADER,
};
use geosphere::Error;
use geosphere_core::distortion::tissot_grid;
use geosphere_core::sphereconv::{build_operator, gnomonic_pattern};
use geosphere_core::{Icosphere, Kernel, LonLat, ProjectionSpec, SphereSignal};

fn signal(order: u32, channels: usize) -> SphereSignal {
    let n = geosphere_core::geodesic::vertex_count(order) * channels;
    let data = (0..n)
        .map(|i| (i as f64 * 0.37).sin() as f32 as f64)
        .collect();
    SphereSignal::new(order, channels, data).unwrap()
}

fn byte_offset(e: Error) -> u64 {
    match e {
        Error::Format { offset, unit, .. } => {
            assert_eq!(unit, "byte");
            offset
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn isph_layout_and_round_trip() {
    let sig = signal(2, 3);
    let bytes = encode_isph(&sig);
    assert_eq!(&bytes[..4], &[0x49, 0x53, 0x50, 0x48]);
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
    assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 162);
    assert_eq!(bytes.len(), 24 + 162 * 3 * 4 + 4);
    let crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    assert_eq!(crc, crc32fast_hash(&bytes[24..bytes.len() - 4]));
    assert_eq!(decode_isph(&bytes).unwrap(), sig);
}

fn crc32fast_hash(b: &[u8]) -> u32 {
    // bitwise CRC-32 (IEEE, reflected), independent of the library used by the encoder
    let mut crc = !0u32;
    for &byte in b {
        crc ^= byte as u32;
        for _ in 0..8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xEDB8_8320
            } else {
                crc >> 1
            };
        }
    }
    !crc
}

#[test]
fn isph_errors_report_offsets() {
    let good = encode_isph(&signal(1, 1));
    let mut bad = good.clone();
    bad[0] = b'X';
    assert_eq!(byte_offset(decode_isph(&bad).unwrap_err()), 0);

    let mut bad = good.clone();
    bad[4] = 9;
    assert_eq!(byte_offset(decode_isph(&bad).unwrap_err()), 4);

    let mut bad = good.clone();
    bad[16] = 41;
    assert_eq!(byte_offset(decode_isph(&bad).unwrap_err()), 16);

    let mut bad = good.clone();
    bad[30] ^= 0xff;
    let crc_at = (good.len() - 4) as u64;
    assert_eq!(byte_offset(decode_isph(&bad).unwrap_err()), crc_at);

    let truncated = &good[..good.len() - 10];
    assert_eq!(
        byte_offset(decode_isph(truncated).unwrap_err()),
        truncated.len() as u64
    );

    let mut long = good.clone();
    long.push(0);
    assert_eq!(
        byte_offset(decode_isph(&long).unwrap_err()),
        good.len() as u64
    );
}

#[test]
fn isop_round_trip_and_corruption() {
    let s = Icosphere::new(2).unwrap();
    let op = build_operator(&s, 3, 3, None).unwrap();
    let bytes = encode_isop(&op);
    assert_eq!(&bytes[..4], b"ISOP");
    assert_eq!(bytes.len(), 24 + 162 * 9 * 40 + 4);
    assert_eq!(decode_isop(&bytes).unwrap(), op);

    let mut bad = bytes.clone();
    bad[100] ^= 1;
    assert_eq!(
        byte_offset(decode_isop(&bad).unwrap_err()),
        (bytes.len() - 4) as u64
    );
    assert!(decode_isop(&bytes[..50]).is_err());
}

#[test]
fn off_export() {
    let s = Icosphere::new(1).unwrap();
    let mut out = Vec::new();
    write_off(&mut out, &s).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "OFF");
    assert_eq!(lines[1], "42 80 120");
    assert_eq!(lines.len(), 2 + 42 + 80);
    let v: Vec<f64> = lines[2].split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(v, s.vertex(0).to_array().to_vec());
    let f = s.faces()[79];
    assert_eq!(lines[2 + 42 + 79], format!("3 {} {} {}", f[0], f[1], f[2]));
}

#[test]
fn csv_outputs_round_trip_floats() {
    let grid = tissot_grid(&ProjectionSpec::mercator(), 8, 5);
    let mut out = Vec::new();
    write_tissot_csv(&mut out, &grid.samples).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TISSOT_CSV_HEADER));
    for (line, s) in lines.zip(&grid.samples) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(
            v,
            vec![
                s.at.lon,
                s.at.lat,
                s.h,
                s.k,
                s.theta_prime,
                s.a,
                s.b,
                s.area_scale,
                s.omega
            ]
        );
    }

    let p = gnomonic_pattern(LonLat::new(0.0, 0.5), 3, 5, 0.02).unwrap();
    let mut out = Vec::new();
    write_pattern_csv(&mut out, &p).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 16);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[0], row[1]), ("-1", "-2"));
    assert_eq!(row[2].parse::<f64>().unwrap(), p.taps[0].lon);
}

#[test]
fn kernel_text_format() {
    let k = Kernel::new(3, 1, 2, 1, vec![0.5, -1.0, 2.0, 0.25, 1e-3, 7.0]).unwrap();
    let text = format_kernel(&k);
    assert!(text.starts_with("3 1 2 1\n"));
    assert_eq!(parse_kernel(&text).unwrap(), k);
    assert_eq!(
        parse_kernel("# box\n1 1 1 1\n\n  4.5\n").unwrap().weights,
        vec![4.5]
    );
    for bad in [
        "",
        "3 3 1",
        "3 3 1 1\n1 2 3",
        "2 2 1 1\n1 1 1 1",
        "1 1 1 1\nabc",
        "1 1 1 1\ninf",
    ] {
        assert!(parse_kernel(bad).is_err(), "{bad:?}");
    }
    match parse_kernel("1 1 1 1\n\nx").unwrap_err() {
        Error::Format { unit, offset, .. } => assert_eq!((unit, offset), ("line", 3)),
        other => panic!("{other:?}"),
    }
}
