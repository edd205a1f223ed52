//! 5×7 bitmap glyphs with an accent row above and a cedilla row below.

/// Glyph cell width in pixels.
pub const GLYPH_W: usize = 5;
/// Cell height: accent row, seven body rows, cedilla row.
pub const GLYPH_H: usize = 9;
/// Horizontal advance including one blank column.
pub const ADVANCE: usize = GLYPH_W + 1;

// Columns for ASCII 0x20..=0x7e, least significant bit at the top.
const ASCII: [[u8; 5]; 95] = [
    [0x00, 0x00, 0x00, 0x00, 0x00],
    [0x00, 0x00, 0x5f, 0x00, 0x00],
    [0x00, 0x07, 0x00, 0x07, 0x00],
    [0x14, 0x7f, 0x14, 0x7f, 0x14],
    [0x24, 0x2a, 0x7f, 0x2a, 0x12],
    [0x23, 0x13, 0x08, 0x64, 0x62],
    [0x36, 0x49, 0x55, 0x22, 0x50],
    [0x00, 0x05, 0x03, 0x00, 0x00],
    [0x00, 0x1c, 0x22, 0x41, 0x00],
    [0x00, 0x41, 0x22, 0x1c, 0x00],
    [0x08, 0x2a, 0x1c, 0x2a, 0x08],
    [0x08, 0x08, 0x3e, 0x08, 0x08],
    [0x00, 0x50, 0x30, 0x00, 0x00],
    [0x08, 0x08, 0x08, 0x08, 0x08],
    [0x00, 0x60, 0x60, 0x00, 0x00],
    [0x20, 0x10, 0x08, 0x04, 0x02],
    [0x3e, 0x51, 0x49, 0x45, 0x3e],
    [0x00, 0x42, 0x7f, 0x40, 0x00],
    [0x42, 0x61, 0x51, 0x49, 0x46],
    [0x21, 0x41, 0x45, 0x4b, 0x31],
    [0x18, 0x14, 0x12, 0x7f, 0x10],
    [0x27, 0x45, 0x45, 0x45, 0x39],
    [0x3c, 0x4a, 0x49, 0x49, 0x30],
    [0x01, 0x71, 0x09, 0x05, 0x03],
    [0x36, 0x49, 0x49, 0x49, 0x36],
    [0x06, 0x49, 0x49, 0x29, 0x1e],
    [0x00, 0x36, 0x36, 0x00, 0x00],
    [0x00, 0x56, 0x36, 0x00, 0x00],
    [0x00, 0x08, 0x14, 0x22, 0x41],
    [0x14, 0x14, 0x14, 0x14, 0x14],
    [0x41, 0x22, 0x14, 0x08, 0x00],
    [0x02, 0x01, 0x51, 0x09, 0x06],
    [0x32, 0x49, 0x79, 0x41, 0x3e],
    [0x7e, 0x11, 0x11, 0x11, 0x7e],
    [0x7f, 0x49, 0x49, 0x49, 0x36],
    [0x3e, 0x41, 0x41, 0x41, 0x22],
    [0x7f, 0x41, 0x41, 0x22, 0x1c],
    [0x7f, 0x49, 0x49, 0x49, 0x41],
    [0x7f, 0x09, 0x09, 0x01, 0x01],
    [0x3e, 0x41, 0x41, 0x51, 0x32],
    [0x7f, 0x08, 0x08, 0x08, 0x7f],
    [0x00, 0x41, 0x7f, 0x41, 0x00],
    [0x20, 0x40, 0x41, 0x3f, 0x01],
    [0x7f, 0x08, 0x14, 0x22, 0x41],
    [0x7f, 0x40, 0x40, 0x40, 0x40],
    [0x7f, 0x02, 0x04, 0x02, 0x7f],
    [0x7f, 0x04, 0x08, 0x10, 0x7f],
    [0x3e, 0x41, 0x41, 0x41, 0x3e],
    [0x7f, 0x09, 0x09, 0x09, 0x06],
    [0x3e, 0x41, 0x51, 0x21, 0x5e],
    [0x7f, 0x09, 0x19, 0x29, 0x46],
    [0x46, 0x49, 0x49, 0x49, 0x31],
    [0x01, 0x01, 0x7f, 0x01, 0x01],
    [0x3f, 0x40, 0x40, 0x40, 0x3f],
    [0x1f, 0x20, 0x40, 0x20, 0x1f],
    [0x7f, 0x20, 0x18, 0x20, 0x7f],
    [0x63, 0x14, 0x08, 0x14, 0x63],
    [0x03, 0x04, 0x78, 0x04, 0x03],
    [0x61, 0x51, 0x49, 0x45, 0x43],
    [0x00, 0x00, 0x7f, 0x41, 0x41],
    [0x02, 0x04, 0x08, 0x10, 0x20],
    [0x41, 0x41, 0x7f, 0x00, 0x00],
    [0x04, 0x02, 0x01, 0x02, 0x04],
    [0x40, 0x40, 0x40, 0x40, 0x40],
    [0x00, 0x01, 0x02, 0x04, 0x00],
    [0x20, 0x54, 0x54, 0x54, 0x78],
    [0x7f, 0x48, 0x44, 0x44, 0x38],
    [0x38, 0x44, 0x44, 0x44, 0x20],
    [0x38, 0x44, 0x44, 0x48, 0x7f],
    [0x38, 0x54, 0x54, 0x54, 0x18],
    [0x08, 0x7e, 0x09, 0x01, 0x02],
    [0x08, 0x14, 0x54, 0x54, 0x3c],
    [0x7f, 0x08, 0x04, 0x04, 0x78],
    [0x00, 0x44, 0x7d, 0x40, 0x00],
    [0x20, 0x40, 0x44, 0x3d, 0x00],
    [0x00, 0x7f, 0x10, 0x28, 0x44],
    [0x00, 0x41, 0x7f, 0x40, 0x00],
    [0x7c, 0x04, 0x18, 0x04, 0x78],
    [0x7c, 0x08, 0x04, 0x04, 0x78],
    [0x38, 0x44, 0x44, 0x44, 0x38],
    [0x7c, 0x14, 0x14, 0x14, 0x08],
    [0x08, 0x14, 0x14, 0x18, 0x7c],
    [0x7c, 0x08, 0x04, 0x04, 0x08],
    [0x48, 0x54, 0x54, 0x54, 0x20],
    [0x04, 0x3f, 0x44, 0x40, 0x20],
    [0x3c, 0x40, 0x40, 0x20, 0x7c],
    [0x1c, 0x20, 0x40, 0x20, 0x1c],
    [0x3c, 0x40, 0x30, 0x40, 0x3c],
    [0x44, 0x28, 0x10, 0x28, 0x44],
    [0x0c, 0x50, 0x50, 0x50, 0x3c],
    [0x44, 0x64, 0x54, 0x4c, 0x44],
    [0x00, 0x08, 0x36, 0x41, 0x00],
    [0x00, 0x00, 0x7f, 0x00, 0x00],
    [0x00, 0x41, 0x36, 0x08, 0x00],
    [0x08, 0x08, 0x2a, 0x1c, 0x08],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    None,
    Grave,
    Acute,
    Circumflex,
    Diaeresis,
    Cedilla,
}

// Accent row patterns, one bit per column, bit 0 leftmost.
fn mark_row(mark: Mark) -> u8 {
    match mark {
        Mark::None | Mark::Cedilla => 0,
        Mark::Grave => 0b00110,
        Mark::Acute => 0b01100,
        Mark::Circumflex => 0b01110,
        Mark::Diaeresis => 0b11011,
    }
}

fn decompose(c: char) -> Option<(char, Mark)> {
    use Mark::*;
    Some(match c {
        'à' => ('a', Grave),
        'À' => ('A', Grave),
        'â' => ('a', Circumflex),
        'Â' => ('A', Circumflex),
        'ä' => ('a', Diaeresis),
        'Ä' => ('A', Diaeresis),
        'ç' => ('c', Cedilla),
        'Ç' => ('C', Cedilla),
        'é' => ('e', Acute),
        'É' => ('E', Acute),
        'è' => ('e', Grave),
        'È' => ('E', Grave),
        'ê' => ('e', Circumflex),
        'Ê' => ('E', Circumflex),
        'ë' => ('e', Diaeresis),
        'Ë' => ('E', Diaeresis),
        'î' => ('i', Circumflex),
        'Î' => ('I', Circumflex),
        'ï' => ('i', Diaeresis),
        'Ï' => ('I', Diaeresis),
        'ô' => ('o', Circumflex),
        'Ô' => ('O', Circumflex),
        'ù' => ('u', Grave),
        'Ù' => ('U', Grave),
        'û' => ('u', Circumflex),
        'Û' => ('U', Circumflex),
        'ü' => ('u', Diaeresis),
        'Ü' => ('U', Diaeresis),
        'ÿ' => ('y', Diaeresis),
        'Ÿ' => ('Y', Diaeresis),
        'ñ' => ('n', Circumflex),
        'Ñ' => ('N', Circumflex),
        _ => return Option::None,
    })
}

fn body(c: char) -> Option<[u8; 5]> {
    match c {
        ' '..='~' => Some(ASCII[c as usize - 0x20]),
        'œ' => Some([0x38, 0x44, 0x7c, 0x54, 0x58]),
        'Œ' => Some([0x3e, 0x41, 0x7f, 0x49, 0x49]),
        'æ' => Some([0x20, 0x54, 0x7c, 0x54, 0x58]),
        'Æ' => Some([0x7e, 0x09, 0x7f, 0x49, 0x49]),
        '°' => Some([0x00, 0x06, 0x09, 0x06, 0x00]),
        '€' => Some([0x14, 0x3e, 0x55, 0x41, 0x22]),
        _ => None,
    }
}

/// A rendered glyph: `GLYPH_H` rows of `GLYPH_W` booleans.
pub type Glyph = [[bool; GLYPH_W]; GLYPH_H];

/// Bitmap for `c`, or `None` when the font has no shape for it.
pub fn glyph(c: char) -> Option<Glyph> {
    let (base, mark) = decompose(c).unwrap_or((c, Mark::None));
    let cols = body(base)?;
    let mut g = [[false; GLYPH_W]; GLYPH_H];
    let accent = mark_row(mark);
    for x in 0..GLYPH_W {
        g[0][x] = accent >> x & 1 == 1;
        for y in 0..7 {
            g[1 + y][x] = cols[x] >> y & 1 == 1;
        }
    }
    if mark == Mark::Cedilla {
        g[8][2] = true;
        g[8][1] = true;
    }
    Some(g)
}

/// Glyph for `c`, falling back to a hollow box.
pub fn glyph_or_box(c: char) -> Glyph {
    glyph(c).unwrap_or_else(|| {
        let mut g = [[false; GLYPH_W]; GLYPH_H];
        for (y, row) in g.iter_mut().enumerate().skip(1).take(7) {
            for (x, px) in row.iter_mut().enumerate() {
                *px = y == 1 || y == 7 || x == 0 || x == GLYPH_W - 1;
            }
        }
        g
    })
}
