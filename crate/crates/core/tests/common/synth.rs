//! Synthetic single-object scenes written as binary PPM.

use rand::Rng;

pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    /// Tight box around the painted pixels, edges on pixel boundaries.
    pub bbox: [f64; 4],
}

impl Scene {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn dist_sq(a: [u8; 3], b: [u8; 3]) -> u32 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (i32::from(x) - i32::from(y)).pow(2) as u32)
        .sum()
}

/// One rectangle or ellipse on a uniform background, with optional per-channel
/// noise of up to `noise` units. The object colour is kept far from the background.
pub fn scene<R: Rng>(
    rng: &mut R,
    width: u32,
    height: u32,
    background: [u8; 3],
    noise: i32,
) -> Scene {
    let color = loop {
        let c: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        if dist_sq(c, background) >= 150 * 150 {
            break c;
        }
    };
    let margin = 8;
    let w = rng.random_range(40..=(width - 2 * margin).min(120));
    let h = rng.random_range(40..=(height - 2 * margin).min(120));
    let x0 = rng.random_range(margin..=width - margin - w);
    let y0 = rng.random_range(margin..=height - margin - h);
    let ellipse = rng.random_bool(0.5);

    let (cx, cy) = (
        f64::from(x0) + f64::from(w) / 2.0,
        f64::from(y0) + f64::from(h) / 2.0,
    );
    let (rx, ry) = (f64::from(w) / 2.0, f64::from(h) / 2.0);
    let inside = |x: u32, y: u32| {
        if x < x0 || y < y0 || x >= x0 + w || y >= y0 + h {
            return false;
        }
        if !ellipse {
            return true;
        }
        let dx = (f64::from(x) + 0.5 - cx) / rx;
        let dy = (f64::from(y) + 0.5 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    };

    let mut pixels = Vec::with_capacity((width * height * 3) as usize);
    let mut tight = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    for y in 0..height {
        for x in 0..width {
            let base = if inside(x, y) {
                tight = [
                    tight[0].min(f64::from(x)),
                    tight[1].min(f64::from(y)),
                    tight[2].max(f64::from(x + 1)),
                    tight[3].max(f64::from(y + 1)),
                ];
                color
            } else {
                background
            };
            for ch in base {
                let n = if noise > 0 {
                    rng.random_range(-noise..=noise)
                } else {
                    0
                };
                pixels.push((i32::from(ch) + n).clamp(0, 255) as u8);
            }
        }
    }
    Scene {
        width,
        height,
        pixels,
        bbox: tight,
    }
}
