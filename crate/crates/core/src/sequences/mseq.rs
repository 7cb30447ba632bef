use super::{CellId, SequenceError, SyncKind, SyncSequence, SYNC_SEQUENCE_LEN};

/// Cyclic shift between consecutive PSS variants.
pub const PSS_SHIFT_PER_ID: usize = 43;

const N: usize = SYNC_SEQUENCE_LEN;

/// Runs a degree-7 Fibonacci LFSR `x(i+7) = x(i+tap) + x(i) mod 2` for one
/// period, starting from `init = [x(0), .., x(6)]`.
fn m_sequence(tap: usize, init: [u8; 7]) -> [u8; N] {
    let mut x = [0u8; N + 7];
    x[..7].copy_from_slice(&init);
    for i in 0..N {
        x[i + 7] = (x[i + tap] + x[i]) % 2;
    }
    let mut out = [0u8; N];
    out.copy_from_slice(&x[..N]);
    out
}

// x^7 + x^4 + 1
fn pss_base() -> [u8; N] {
    m_sequence(4, [0, 1, 1, 0, 1, 1, 1])
}

fn sss_x0() -> [u8; N] {
    m_sequence(4, [1, 0, 0, 0, 0, 0, 0])
}

// x^7 + x + 1
fn sss_x1() -> [u8; N] {
    m_sequence(1, [1, 0, 0, 0, 0, 0, 0])
}

fn bpsk(bit: u8) -> i8 {
    1 - 2 * bit as i8
}

/// PSS for `n_id_2`: the base m-sequence advanced by `43 * n_id_2`.
pub fn gen_pss(n_id_2: u8) -> Result<SyncSequence, SequenceError> {
    if n_id_2 > 2 {
        return Err(SequenceError::InvalidId(format!("n_id_2 {n_id_2} outside 0..=2")));
    }
    let x = pss_base();
    let shift = PSS_SHIFT_PER_ID * usize::from(n_id_2);
    let values = (0..N).map(|n| bpsk(x[(n + shift) % N])).collect();
    Ok(SyncSequence::new(SyncKind::Pss, values))
}

/// SSS for a cell: product of two shifted m-sequences.
pub fn gen_sss(id: CellId) -> Result<SyncSequence, SequenceError> {
    // re-validate in case the id came from deserialization
    let id = CellId::new(id.n_id_1(), id.n_id_2())?;
    let n1 = usize::from(id.n_id_1());
    let n2 = usize::from(id.n_id_2());
    let m0 = 15 * (n1 / 112) + 5 * n2;
    let m1 = n1 % 112;
    let (x0, x1) = (sss_x0(), sss_x1());
    let values = (0..N).map(|n| bpsk(x0[(n + m0) % N]) * bpsk(x1[(n + m1) % N])).collect();
    Ok(SyncSequence::new(SyncKind::Sss, values))
}
