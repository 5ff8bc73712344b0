//! Baseline sequential decoder (SOF0/SOF1, Huffman, single scan, 8-bit).
//! Chroma planes subsampled by two are reconstructed with the triangle
//! ("fancy") upsampler.

use super::dct::idct;
use super::tables::ZIGZAG;
use crate::error::{Error, Result};
use crate::image::PlanarImage;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Jpeg(msg.into()))
}

#[derive(Clone)]
struct HuffmanTable {
    maxcode: [i32; 18],
    valptr: [i32; 17],
    mincode: [i32; 17],
    values: Vec<u8>,
}

impl HuffmanTable {
    fn new(bits: &[u8], values: Vec<u8>) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return err("malformed huffman table");
        }
        let mut maxcode = [-1i32; 18];
        let mut valptr = [0i32; 17];
        let mut mincode = [0i32; 17];
        let mut code = 0i32;
        let mut k = 0i32;
        for len in 1..=16 {
            let n = i32::from(bits[len - 1]);
            if n > 0 {
                valptr[len] = k;
                mincode[len] = code;
                code += n;
                k += n;
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
        maxcode[17] = i32::MAX;
        Ok(Self {
            maxcode,
            valptr,
            mincode,
            values,
        })
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
    hit_marker: bool,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self {
            data,
            pos,
            acc: 0,
            nbits: 0,
            hit_marker: false,
        }
    }

    fn fill(&mut self) {
        while self.nbits <= 24 {
            let mut byte = 0u8;
            if !self.hit_marker && self.pos < self.data.len() {
                byte = self.data[self.pos];
                if byte == 0xFF {
                    match self.data.get(self.pos + 1) {
                        Some(0x00) => self.pos += 2,
                        _ => {
                            self.hit_marker = true;
                            byte = 0;
                        }
                    }
                } else {
                    self.pos += 1;
                }
            }
            self.acc |= u32::from(byte) << (24 - self.nbits);
            self.nbits += 8;
        }
    }

    fn bit(&mut self) -> u32 {
        if self.nbits == 0 {
            self.fill();
        }
        let b = self.acc >> 31;
        self.acc <<= 1;
        self.nbits -= 1;
        b
    }

    fn bits(&mut self, n: u8) -> u32 {
        if n == 0 {
            return 0;
        }
        if self.nbits < u32::from(n) {
            self.fill();
        }
        let v = self.acc >> (32 - u32::from(n));
        self.acc <<= n;
        self.nbits -= u32::from(n);
        v
    }

    fn decode(&mut self, table: &HuffmanTable) -> Result<u8> {
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | self.bit() as i32;
            if code <= table.maxcode[len] {
                let idx = table.valptr[len] + code - table.mincode[len];
                return Ok(table.values[idx as usize]);
            }
        }
        err("bad huffman code")
    }

    fn receive_extend(&mut self, size: u8) -> i32 {
        if size == 0 {
            return 0;
        }
        let v = self.bits(size) as i32;
        if v < 1 << (size - 1) {
            v - (1 << size) + 1
        } else {
            v
        }
    }

    /// Discards buffered bits and consumes an RSTn marker.
    fn restart(&mut self) -> Result<()> {
        self.acc = 0;
        self.nbits = 0;
        self.hit_marker = false;
        while self.pos + 1 < self.data.len()
            && !(self.data[self.pos] == 0xFF && self.data[self.pos + 1] != 0x00)
        {
            self.pos += 1;
        }
        match self.data.get(self.pos..self.pos + 2) {
            Some([0xFF, m]) if (0xD0..=0xD7).contains(m) => {
                self.pos += 2;
                Ok(())
            }
            _ => err("missing restart marker"),
        }
    }
}

struct FrameComponent {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    dc: usize,
    ac: usize,
    /// Width/height in blocks, padded to whole MCUs.
    bw: usize,
    bh: usize,
    samples: Vec<f64>,
}

fn be16(data: &[u8], pos: usize) -> Result<usize> {
    match data.get(pos..pos + 2) {
        Some(b) => Ok(usize::from(u16::from_be_bytes([b[0], b[1]]))),
        None => err("truncated stream"),
    }
}

pub fn decode(data: &[u8]) -> Result<PlanarImage> {
    if data.get(..2) != Some(&[0xFF, 0xD8]) {
        return err("missing SOI marker");
    }
    let mut pos = 2;
    let mut qt: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut comps: Vec<FrameComponent> = Vec::new();
    let (mut width, mut height) = (0usize, 0usize);
    let mut restart_interval = 0usize;
    let mut decoded = false;

    loop {
        while data.get(pos) == Some(&0xFF) && data.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        let marker = match data.get(pos..pos + 2) {
            Some([0xFF, m]) => *m,
            _ => return err("expected marker"),
        };
        pos += 2;
        match marker {
            0xD9 => break,
            0xD0..=0xD7 | 0x01 => continue,
            _ => {}
        }
        let len = be16(data, pos)?;
        let seg = data
            .get(pos + 2..pos + len)
            .ok_or_else(|| Error::Jpeg("truncated segment".into()))?;
        match marker {
            0xDB => {
                let mut p = 0;
                while p < seg.len() {
                    let (precision, id) = (seg[p] >> 4, (seg[p] & 15) as usize);
                    p += 1;
                    if id > 3 {
                        return err("bad quantization table id");
                    }
                    let mut table = [0u16; 64];
                    for &n in ZIGZAG.iter() {
                        table[n] = if precision == 0 {
                            let v = *seg.get(p).ok_or_else(|| Error::Jpeg("short DQT".into()))?;
                            p += 1;
                            u16::from(v)
                        } else {
                            let v = be16(seg, p)? as u16;
                            p += 2;
                            v
                        };
                    }
                    qt[id] = Some(table);
                }
            }
            0xC4 => {
                let mut p = 0;
                while p < seg.len() {
                    let (class, id) = (seg[p] >> 4, (seg[p] & 15) as usize);
                    let bits = seg
                        .get(p + 1..p + 17)
                        .ok_or_else(|| Error::Jpeg("short DHT".into()))?;
                    let n: usize = bits.iter().map(|&b| b as usize).sum();
                    let values = seg
                        .get(p + 17..p + 17 + n)
                        .ok_or_else(|| Error::Jpeg("short DHT".into()))?
                        .to_vec();
                    if id > 3 || class > 1 {
                        return err("bad huffman table id");
                    }
                    let table = HuffmanTable::new(bits, values)?;
                    if class == 0 {
                        dc_tables[id] = Some(table);
                    } else {
                        ac_tables[id] = Some(table);
                    }
                    p += 17 + n;
                }
            }
            0xC0 | 0xC1 => {
                if seg.len() < 6 || seg[0] != 8 {
                    return err("only 8-bit baseline frames are supported");
                }
                height = be16(seg, 1)?;
                width = be16(seg, 3)?;
                let n = seg[5] as usize;
                if width == 0 || height == 0 || (n != 1 && n != 3) || seg.len() < 6 + 3 * n {
                    return err("unsupported frame header");
                }
                for i in 0..n {
                    let c = &seg[6 + 3 * i..9 + 3 * i];
                    let (h, v) = ((c[1] >> 4) as usize, (c[1] & 15) as usize);
                    if !(1..=4).contains(&h) || !(1..=4).contains(&v) || c[2] > 3 {
                        return err("bad component parameters");
                    }
                    comps.push(FrameComponent {
                        id: c[0],
                        h,
                        v,
                        tq: c[2] as usize,
                        dc: 0,
                        ac: 0,
                        bw: 0,
                        bh: 0,
                        samples: Vec::new(),
                    });
                }
            }
            0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return err("only baseline sequential huffman coding is supported");
            }
            0xDD => restart_interval = be16(seg, 0)?,
            0xDA => {
                if comps.is_empty() {
                    return err("scan before frame header");
                }
                if decoded {
                    return err("multi-scan images are not supported");
                }
                let ns = *seg.first().unwrap_or(&0) as usize;
                if seg.len() < 1 + 2 * ns + 3 {
                    return err("truncated scan header");
                }
                if ns != comps.len() {
                    return err("scan must include every component");
                }
                for i in 0..ns {
                    let (id, tables) = (seg[1 + 2 * i], seg[2 + 2 * i]);
                    let comp = comps
                        .iter_mut()
                        .find(|c| c.id == id)
                        .ok_or_else(|| Error::Jpeg("scan references unknown component".into()))?;
                    comp.dc = (tables >> 4) as usize;
                    comp.ac = (tables & 15) as usize;
                }
                pos += len;
                pos = decode_scan(
                    data,
                    pos,
                    &mut comps,
                    (width, height),
                    &qt,
                    &dc_tables,
                    &ac_tables,
                    restart_interval,
                )?;
                decoded = true;
                continue;
            }
            _ => {}
        }
        pos += len;
    }
    if !decoded {
        return err("no scan data");
    }
    reconstruct(&comps, width, height)
}

#[allow(clippy::too_many_arguments)]
fn decode_scan(
    data: &[u8],
    pos: usize,
    comps: &mut [FrameComponent],
    (width, height): (usize, usize),
    qt: &[Option<[u16; 64]>; 4],
    dc_tables: &[Option<HuffmanTable>; 4],
    ac_tables: &[Option<HuffmanTable>; 4],
    restart_interval: usize,
) -> Result<usize> {
    let hmax = comps.iter().map(|c| c.h).max().unwrap();
    let vmax = comps.iter().map(|c| c.v).max().unwrap();
    let single = comps.len() == 1;
    let (mcus_x, mcus_y) = if single {
        // Non-interleaved: one block per MCU over the component's own grid.
        let c = &comps[0];
        (
            (width * c.h).div_ceil(hmax * 8),
            (height * c.v).div_ceil(vmax * 8),
        )
    } else {
        (width.div_ceil(8 * hmax), height.div_ceil(8 * vmax))
    };
    for c in comps.iter_mut() {
        let (uh, uv) = if single { (1, 1) } else { (c.h, c.v) };
        c.bw = mcus_x * uh;
        c.bh = mcus_y * uv;
        c.samples = vec![0.0; c.bw * c.bh * 64];
        if qt[c.tq].is_none() || dc_tables[c.dc].is_none() || ac_tables[c.ac].is_none() {
            return err("scan references a missing table");
        }
    }

    let mut reader = BitReader::new(data, pos);
    let mut preds = vec![0i32; comps.len()];
    let total = mcus_x * mcus_y;
    for m in 0..total {
        if restart_interval > 0 && m > 0 && m % restart_interval == 0 {
            reader.restart()?;
            preds.iter_mut().for_each(|p| *p = 0);
        }
        let (mx, my) = (m % mcus_x, m / mcus_x);
        for (ci, c) in comps.iter_mut().enumerate() {
            let (uh, uv) = if single { (1, 1) } else { (c.h, c.v) };
            let q = qt[c.tq].as_ref().unwrap();
            let dc = dc_tables[c.dc].as_ref().unwrap();
            let ac = ac_tables[c.ac].as_ref().unwrap();
            for by in 0..uv {
                for bx in 0..uh {
                    let mut coefs = [0.0f64; 64];
                    let size = reader.decode(dc)?;
                    if size > 11 {
                        return err("bad DC magnitude");
                    }
                    preds[ci] += reader.receive_extend(size);
                    coefs[0] = f64::from(preds[ci]) * f64::from(q[0]);
                    let mut k = 1;
                    while k < 64 {
                        let rs = reader.decode(ac)?;
                        let (run, size) = ((rs >> 4) as usize, rs & 15);
                        if size == 0 {
                            if run == 15 {
                                k += 16;
                                continue;
                            }
                            break;
                        }
                        k += run;
                        if k > 63 {
                            return err("AC run overflows block");
                        }
                        let n = ZIGZAG[k];
                        coefs[n] = f64::from(reader.receive_extend(size)) * f64::from(q[n]);
                        k += 1;
                    }
                    let pixels = idct(&coefs);
                    let (x0, y0) = ((mx * uh + bx) * 8, (my * uv + by) * 8);
                    let stride = c.bw * 8;
                    for y in 0..8 {
                        for x in 0..8 {
                            c.samples[(y0 + y) * stride + x0 + x] =
                                (pixels[y * 8 + x] + 128.0).round().clamp(0.0, 255.0);
                        }
                    }
                }
            }
        }
    }
    // Skip to the next marker that is not a restart.
    let mut p = reader.pos;
    while p + 1 < data.len() {
        if data[p] == 0xFF && data[p + 1] != 0x00 && !(0xD0..=0xD7).contains(&data[p + 1]) {
            return Ok(p);
        }
        p += 1;
    }
    err("missing EOI marker")
}

/// Resamples a component plane to full resolution. Factor-of-two axes use
/// the 3/4, 1/4 triangle filter; other ratios replicate.
fn upsample(
    src: &[f64],
    stride: usize,
    (cw, ch): (usize, usize),
    (fx, fy): (usize, usize),
    (width, height): (usize, usize),
) -> Vec<f64> {
    let get = |x: isize, y: isize| -> f64 {
        let x = x.clamp(0, cw as isize - 1) as usize;
        let y = y.clamp(0, ch as isize - 1) as usize;
        src[y * stride + x]
    };
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let (sx, nx) = axis_taps(x, fx);
            let (sy, ny) = axis_taps(y, fy);
            let v = match (nx, ny) {
                (None, None) => get(sx, sy),
                (Some(nx), None) => 0.75 * get(sx, sy) + 0.25 * get(nx, sy),
                (None, Some(ny)) => 0.75 * get(sx, sy) + 0.25 * get(sx, ny),
                (Some(nx), Some(ny)) => {
                    0.5625 * get(sx, sy)
                        + 0.1875 * get(nx, sy)
                        + 0.1875 * get(sx, ny)
                        + 0.0625 * get(nx, ny)
                }
            };
            out[y * width + x] = v;
        }
    }
    out
}

/// Nearest source index and, for 2:1 axes, the neighbor on the same side.
fn axis_taps(i: usize, factor: usize) -> (isize, Option<isize>) {
    match factor {
        1 => (i as isize, None),
        2 => {
            let s = (i / 2) as isize;
            let n = if i % 2 == 0 { s - 1 } else { s + 1 };
            (s, Some(n))
        }
        f => ((i / f) as isize, None),
    }
}

fn reconstruct(comps: &[FrameComponent], width: usize, height: usize) -> Result<PlanarImage> {
    let hmax = comps.iter().map(|c| c.h).max().unwrap();
    let vmax = comps.iter().map(|c| c.v).max().unwrap();
    let planes: Vec<Vec<f64>> = comps
        .iter()
        .map(|c| {
            let (fx, fy) = (hmax / c.h, vmax / c.v);
            let cw = (width * c.h).div_ceil(hmax);
            let ch = (height * c.v).div_ceil(vmax);
            upsample(&c.samples, c.bw * 8, (cw, ch), (fx, fy), (width, height))
        })
        .collect();
    let n = width * height;
    if planes.len() == 1 {
        let grey = planes[0].iter().map(|v| v.round().clamp(0.0, 255.0) / 255.0).collect();
        return PlanarImage::new(width, height, 1, grey);
    }
    let mut out = vec![0.0; 3 * n];
    let to_unit = |v: f64| v.round().clamp(0.0, 255.0) / 255.0;
    for i in 0..n {
        let y = planes[0][i];
        let cb = planes[1][i] - 128.0;
        let cr = planes[2][i] - 128.0;
        out[i] = to_unit(y + 1.402 * cr);
        out[n + i] = to_unit(y - 0.344_136_286_201_022 * cb - 0.714_136_286_201_022 * cr);
        out[2 * n + i] = to_unit(y + 1.772 * cb);
    }
    PlanarImage::new(width, height, 3, out)
}
