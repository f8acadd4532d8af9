const TWO_TABLE: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Kronecker symbol `(a / b)`.
pub fn kronecker(a: i64, b: i64) -> i32 {
    if b == 0 {
        return i32::from(a == 1 || a == -1);
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut a = a as i128;
    let mut b = b as i128;
    let mut v = 0;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    let mut k = if v % 2 == 0 { 1 } else { TWO_TABLE[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        let mut v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TWO_TABLE[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}
