//! Baseline sequential encoder: JFIF, BT.601 full-range YCbCr, 4:2:0
//! chroma, standard Huffman tables.

use super::dct::fdct;
use super::tables::*;
use crate::image::{quantize_u8, PlanarImage};

/// Canonical Huffman code table indexed by symbol: `(code, length)`.
pub(crate) struct HuffmanCodes {
    codes: [(u16, u8); 256],
}

impl HuffmanCodes {
    pub(crate) fn new(bits: &[u8; 16], values: &[u8]) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0;
        for (len_minus_one, &count) in bits.iter().enumerate() {
            for _ in 0..count {
                codes[values[k] as usize] = (code, len_minus_one as u8 + 1);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Self { codes }
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self { out, acc: 0, nbits: 0 }
    }

    fn put(&mut self, value: u16, len: u8) {
        if len == 0 {
            return;
        }
        let len = u32::from(len);
        self.acc = (self.acc << len) | (u32::from(value) & ((1 << len) - 1));
        self.nbits += len;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.put((1 << pad) - 1, pad);
        }
        self.out
    }
}

/// Magnitude category and the low bits written after the Huffman symbol.
fn category(v: i32) -> (u8, u16) {
    let mag = v.unsigned_abs();
    let size = (32 - mag.leading_zeros()) as u8;
    let bits = if v < 0 { (v - 1) as u16 } else { v as u16 };
    (size, bits & ((1u32 << size) - 1) as u16)
}

struct Component {
    id: u8,
    h: usize,
    v: usize,
    table: usize,
    /// Samples at the component's block-padded resolution.
    plane: Vec<f64>,
    width: usize,
}

fn write_marker(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn dht_payload(class: u8, id: u8, bits: &[u8; 16], values: &[u8]) -> Vec<u8> {
    let mut p = vec![(class << 4) | id];
    p.extend_from_slice(bits);
    p.extend_from_slice(values);
    p
}

/// Edge-replicating sample fetch.
fn at(plane: &[u8], w: usize, h: usize, x: usize, y: usize) -> u8 {
    plane[y.min(h - 1) * w + x.min(w - 1)]
}

/// Encodes `image` as a baseline JPEG at IJG `quality` (1..=100).
pub fn encode(image: &PlanarImage, quality: u8) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let luma_q = scaled_quant_table(&STD_LUMA_QUANT, quality);
    let chroma_q = scaled_quant_table(&STD_CHROMA_QUANT, quality);
    let color = image.channels() == 3;

    // 8-bit YCbCr planes at full resolution.
    let to_u8 = |c: usize| -> Vec<u8> { image.plane(c).iter().map(|&v| quantize_u8(v)).collect() };
    let planes: Vec<Vec<u8>> = if color {
        let (r, g, b) = (to_u8(0), to_u8(1), to_u8(2));
        let mut y = Vec::with_capacity(w * h);
        let mut cb = Vec::with_capacity(w * h);
        let mut cr = Vec::with_capacity(w * h);
        for i in 0..w * h {
            let (r, g, b) = (f64::from(r[i]), f64::from(g[i]), f64::from(b[i]));
            let conv = |v: f64| v.round().clamp(0.0, 255.0) as u8;
            y.push(conv(0.299 * r + 0.587 * g + 0.114 * b));
            cb.push(conv(-0.168_735_891_647_856 * r - 0.331_264_108_352_144 * g + 0.5 * b + 128.0));
            cr.push(conv(0.5 * r - 0.418_687_589_158_158 * g - 0.081_312_410_841_842 * b + 128.0));
        }
        vec![y, cb, cr]
    } else {
        vec![to_u8(0)]
    };

    let (mcu_w, mcu_h) = if color { (16, 16) } else { (8, 8) };
    let mcus_x = w.div_ceil(mcu_w);
    let mcus_y = h.div_ceil(mcu_h);
    let (pw, ph) = (mcus_x * mcu_w, mcus_y * mcu_h);

    let mut comps = Vec::new();
    if color {
        let luma: Vec<f64> = (0..pw * ph)
            .map(|i| f64::from(at(&planes[0], w, h, i % pw, i / pw)))
            .collect();
        comps.push(Component { id: 1, h: 2, v: 2, table: 0, plane: luma, width: pw });
        let (cw, ch) = (pw / 2, ph / 2);
        for (k, id) in [(1usize, 2u8), (2, 3)] {
            let src = &planes[k];
            let mut sub = Vec::with_capacity(cw * ch);
            for y in 0..ch {
                for x in 0..cw {
                    let s = u32::from(at(src, w, h, 2 * x, 2 * y))
                        + u32::from(at(src, w, h, 2 * x + 1, 2 * y))
                        + u32::from(at(src, w, h, 2 * x, 2 * y + 1))
                        + u32::from(at(src, w, h, 2 * x + 1, 2 * y + 1));
                    sub.push(f64::from((s + 2) / 4));
                }
            }
            comps.push(Component { id, h: 1, v: 1, table: 1, plane: sub, width: cw });
        }
    } else {
        let grey: Vec<f64> = (0..pw * ph)
            .map(|i| f64::from(at(&planes[0], w, h, i % pw, i / pw)))
            .collect();
        comps.push(Component { id: 1, h: 1, v: 1, table: 0, plane: grey, width: pw });
    }

    let mut out = vec![0xFF, 0xD8];
    write_marker(
        &mut out,
        0xE0,
        &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0],
    );
    let tables: &[(u8, &[u16; 64])] = if color {
        &[(0, &luma_q), (1, &chroma_q)]
    } else {
        &[(0, &luma_q)]
    };
    for &(id, table) in tables {
        let mut p = vec![id];
        p.extend(ZIGZAG.iter().map(|&n| table[n] as u8));
        write_marker(&mut out, 0xDB, &p);
    }

    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.push(comps.len() as u8);
    for c in &comps {
        sof.extend_from_slice(&[c.id, ((c.h as u8) << 4) | c.v as u8, c.table as u8]);
    }
    write_marker(&mut out, 0xC0, &sof);

    write_marker(&mut out, 0xC4, &dht_payload(0, 0, &DC_LUMA_BITS, &DC_LUMA_VALUES));
    write_marker(&mut out, 0xC4, &dht_payload(1, 0, &AC_LUMA_BITS, &AC_LUMA_VALUES));
    if color {
        write_marker(&mut out, 0xC4, &dht_payload(0, 1, &DC_CHROMA_BITS, &DC_CHROMA_VALUES));
        write_marker(&mut out, 0xC4, &dht_payload(1, 1, &AC_CHROMA_BITS, &AC_CHROMA_VALUES));
    }

    let mut sos = vec![comps.len() as u8];
    for c in &comps {
        sos.extend_from_slice(&[c.id, ((c.table as u8) << 4) | c.table as u8]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    write_marker(&mut out, 0xDA, &sos);

    let dc_codes = [
        HuffmanCodes::new(&DC_LUMA_BITS, &DC_LUMA_VALUES),
        HuffmanCodes::new(&DC_CHROMA_BITS, &DC_CHROMA_VALUES),
    ];
    let ac_codes = [
        HuffmanCodes::new(&AC_LUMA_BITS, &AC_LUMA_VALUES),
        HuffmanCodes::new(&AC_CHROMA_BITS, &AC_CHROMA_VALUES),
    ];
    let quant = [luma_q, chroma_q];

    let mut bits = BitWriter::new(out);
    let mut preds = vec![0i32; comps.len()];
    for my in 0..mcus_y {
        for mx in 0..mcus_x {
            for (ci, comp) in comps.iter().enumerate() {
                for by in 0..comp.v {
                    for bx in 0..comp.h {
                        let x0 = (mx * comp.h + bx) * 8;
                        let y0 = (my * comp.v + by) * 8;
                        let mut block = [0.0; 64];
                        for y in 0..8 {
                            for x in 0..8 {
                                block[y * 8 + x] = comp.plane[(y0 + y) * comp.width + x0 + x] - 128.0;
                            }
                        }
                        let coefs = fdct(&block);
                        let q = &quant[comp.table];
                        let mut zz = [0i32; 64];
                        for (k, &n) in ZIGZAG.iter().enumerate() {
                            let level = (coefs[n] / f64::from(q[n])).round() as i32;
                            zz[k] = if k == 0 { level } else { level.clamp(-1023, 1023) };
                        }
                        encode_block(
                            &mut bits,
                            &zz,
                            &mut preds[ci],
                            &dc_codes[comp.table],
                            &ac_codes[comp.table],
                        );
                    }
                }
            }
        }
    }
    let mut out = bits.finish();
    out.extend_from_slice(&[0xFF, 0xD9]);
    out
}

fn encode_block(
    bits: &mut BitWriter,
    zz: &[i32; 64],
    pred: &mut i32,
    dc: &HuffmanCodes,
    ac: &HuffmanCodes,
) {
    let diff = zz[0] - *pred;
    *pred = zz[0];
    let (size, extra) = category(diff);
    let (code, len) = dc.codes[size as usize];
    bits.put(code, len);
    bits.put(extra, size);

    let mut run = 0u8;
    for &v in &zz[1..] {
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            let (code, len) = ac.codes[0xF0];
            bits.put(code, len);
            run -= 16;
        }
        let (size, extra) = category(v);
        let (code, len) = ac.codes[((run << 4) | size) as usize];
        bits.put(code, len);
        bits.put(extra, size);
        run = 0;
    }
    if run > 0 {
        let (code, len) = ac.codes[0x00];
        bits.put(code, len);
    }
}
