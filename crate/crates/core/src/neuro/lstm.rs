//! LSTM layer, unidirectional or bidirectional, with backpropagation through time.
//!
//! Gate blocks in the stacked weight matrices are ordered `[i, f, g, o]`:
//!
//! ```text
//! i = σ(W_xi x + W_hi h + b_i)     f = σ(…)     o = σ(…)
//! g = tanh(W_xg x + W_hg h + b_g)
//! c_t = f ⊙ c_{t-1} + i ⊙ g        h_t = o ⊙ tanh(c_t)
//! ```
//!
//! Initial hidden and cell states are zero.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;

use super::init::{glorot_uniform, uniform};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stacked gate parameters for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmWeights<T> {
    /// `4H × d`, input-to-gate.
    pub w_x: Array2<T>,
    /// `4H × H`, hidden-to-gate.
    pub w_h: Array2<T>,
    /// `4H`.
    pub bias: Array1<T>,
}

impl<T: Real> LstmWeights<T> {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w_x: Array2::zeros((4 * hidden, input_dim)),
            w_h: Array2::zeros((4 * hidden, hidden)),
            bias: Array1::zeros(4 * hidden),
        }
    }

    /// Glorot-uniform input weights, uniform recurrent weights with the same
    /// rule on `(H, 4H)`, zero biases except the forget gate at 1.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let w_x = glorot_uniform(4 * hidden, input_dim, input_dim, 4 * hidden, rng);
        let a = (6.0 / (5 * hidden) as f64).sqrt();
        let w_h = uniform(4 * hidden, hidden, a, rng);
        let mut bias = Array1::zeros(4 * hidden);
        bias.slice_mut(s![hidden..2 * hidden]).fill(T::one());
        Self { w_x, w_h, bias }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer<T> {
    pub forward: LstmWeights<T>,
    /// Present for a bidirectional layer; runs over the reversed sequence.
    pub backward: Option<LstmWeights<T>>,
    /// Full `[B, T, width]` sequence, or only the final state `[B, width]`.
    pub return_sequences: bool,
}

struct DirectionCache<T> {
    /// `[steps, B, 4H]` activated gates `[i, f, g, o]`.
    gates: Array3<T>,
    /// `[steps + 1, B, H]`, index 0 is the zero initial state.
    cells: Array3<T>,
    hidden: Array3<T>,
    /// `[steps, B, H]`.
    tanh_cells: Array3<T>,
    reverse: bool,
}

pub(crate) struct LstmCache<T> {
    input: Array3<T>,
    dirs: Vec<DirectionCache<T>>,
}

impl<T: Real> LstmLayer<T> {
    pub fn new<R: Rng>(
        input_dim: usize,
        hidden: usize,
        bidirectional: bool,
        return_sequences: bool,
        rng: &mut R,
    ) -> Self {
        let forward = LstmWeights::init(input_dim, hidden, rng);
        let backward = bidirectional.then(|| LstmWeights::init(input_dim, hidden, rng));
        Self {
            forward,
            backward,
            return_sequences,
        }
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn is_bidirectional(&self) -> bool {
        self.backward.is_some()
    }

    /// Width of the output features: `H`, or `2H` when bidirectional.
    pub fn width(&self) -> usize {
        self.hidden() * if self.is_bidirectional() { 2 } else { 1 }
    }

    fn directions(&self) -> impl Iterator<Item = (&LstmWeights<T>, bool)> {
        std::iter::once((&self.forward, false)).chain(self.backward.iter().map(|w| (w, true)))
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let shape = x.shape();
        if shape.len() != 3 || shape[2] != self.input_dim() || shape[1] == 0 {
            return Err(Error::Dimension(format!(
                "LSTM expects [batch, time >= 1, {}], got {:?}",
                self.input_dim(),
                shape
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward_cached(x)?.0)
    }

    pub(crate) fn forward_cached(&self, x: &Tensor<T>) -> Result<(Tensor<T>, LstmCache<T>)> {
        self.check_input(x)?;
        let input = x.view3()?;
        let dirs: Vec<_> = self
            .directions()
            .map(|(w, reverse)| run_direction(w, input, reverse))
            .collect();
        let out = self.assemble_output(input.dim(), &dirs);
        Ok((
            out,
            LstmCache {
                input: input.to_owned(),
                dirs,
            },
        ))
    }

    fn assemble_output(&self, (b, tl, _): (usize, usize, usize), dirs: &[DirectionCache<T>]) -> Tensor<T> {
        let h = self.hidden();
        let width = self.width();
        if self.return_sequences {
            let mut out = Array3::<T>::zeros((b, tl, width));
            for (k, dir) in dirs.iter().enumerate() {
                for step in 0..tl {
                    let t = if dir.reverse { tl - 1 - step } else { step };
                    out.slice_mut(s![.., t, k * h..(k + 1) * h])
                        .assign(&dir.hidden.index_axis(Axis(0), step + 1));
                }
            }
            Tensor::new(vec![b, tl, width], out.into_raw_vec_and_offset().0).expect("lstm output")
        } else {
            let mut out = Array2::<T>::zeros((b, width));
            for (k, dir) in dirs.iter().enumerate() {
                out.slice_mut(s![.., k * h..(k + 1) * h])
                    .assign(&dir.hidden.index_axis(Axis(0), tl));
            }
            Tensor::from_array2(out)
        }
    }

    /// Returns `(d_input, [d_w_x, d_w_h, d_bias] per direction)`.
    pub(crate) fn backward(&self, cache: &LstmCache<T>, grad: &Tensor<T>) -> Result<(Tensor<T>, Vec<Vec<T>>)> {
        let (b, tl, d) = cache.input.dim();
        let h = self.hidden();
        let mut dx = Array3::<T>::zeros((b, tl, d));
        let mut grads = Vec::new();
        for (k, ((w, _), dir)) in self.directions().zip(cache.dirs.iter()).enumerate() {
            let mut dh_out = Array3::<T>::zeros((b, tl, h));
            if self.return_sequences {
                let g = grad.view3()?;
                dh_out.assign(&g.slice(s![.., .., k * h..(k + 1) * h]));
            } else {
                let g = grad.view2()?;
                let t_last = if dir.reverse { 0 } else { tl - 1 };
                dh_out
                    .slice_mut(s![.., t_last, ..])
                    .assign(&g.slice(s![.., k * h..(k + 1) * h]));
            }
            let [gx, gh, gb] = backprop_direction(w, cache.input.view(), dir, dh_out.view(), &mut dx);
            grads.push(gx);
            grads.push(gh);
            grads.push(gb);
        }
        let dx = Tensor::new(vec![b, tl, d], dx.into_raw_vec_and_offset().0)?;
        Ok((dx, grads))
    }
}

/// Copies `x[b, t, :]` into processing order `[step, b, :]`.
fn step_major<T: Real>(x: ArrayView3<'_, T>, reverse: bool) -> Array3<T> {
    let (b, tl, d) = x.dim();
    let mut out = Array3::<T>::zeros((tl, b, d));
    for step in 0..tl {
        let t = if reverse { tl - 1 - step } else { step };
        out.index_axis_mut(Axis(0), step).assign(&x.slice(s![.., t, ..]));
    }
    out
}

fn flat<T: Real>(a: &Array3<T>) -> ArrayView2<'_, T> {
    let (p, q, r) = a.dim();
    a.view().into_shape_with_order((p * q, r)).expect("contiguous array")
}

fn run_direction<T: Real>(w: &LstmWeights<T>, x: ArrayView3<'_, T>, reverse: bool) -> DirectionCache<T> {
    let (b, tl, _) = x.dim();
    let h = w.hidden();
    let g4 = 4 * h;
    let mut gates = Array3::<T>::zeros((tl, b, g4));
    let mut cells = Array3::<T>::zeros((tl + 1, b, h));
    let mut hidden = Array3::<T>::zeros((tl + 1, b, h));
    let mut tanh_cells = Array3::<T>::zeros((tl, b, h));
    let wht = w.w_h.t();

    // input contributions for every step in one product
    {
        let xs = step_major(x, reverse);
        let mut z = gates
            .view_mut()
            .into_shape_with_order((tl * b, g4))
            .expect("contiguous gates");
        z.assign(&w.bias.broadcast((tl * b, g4)).expect("bias broadcast"));
        general_mat_mul(T::one(), &flat(&xs), &w.w_x.t(), T::one(), &mut z);
    }

    for step in 0..tl {
        {
            let mut z = gates.index_axis_mut(Axis(0), step);
            general_mat_mul(T::one(), &hidden.index_axis(Axis(0), step), &wht, T::one(), &mut z);
        }
        let z = gates
            .index_axis_mut(Axis(0), step)
            .into_slice()
            .expect("contiguous gate block");
        let (c_prev, c_next) = cells.view_mut().split_at(Axis(0), step + 1);
        let c_prev = c_prev.index_axis_move(Axis(0), step);
        let c_prev = c_prev.as_slice().expect("contiguous cells");
        let mut c_next = c_next.index_axis_move(Axis(0), 0);
        let c_next = c_next.as_slice_mut().expect("contiguous cells");
        let mut h_next = hidden.index_axis_mut(Axis(0), step + 1);
        let h_next = h_next.as_slice_mut().expect("contiguous hidden");
        let mut tc = tanh_cells.index_axis_mut(Axis(0), step);
        let tc = tc.as_slice_mut().expect("contiguous cells");
        for bi in 0..b {
            let zr = &mut z[bi * g4..(bi + 1) * g4];
            T::expit_slice(&mut zr[..2 * h]);
            T::tanh_slice(&mut zr[2 * h..3 * h]);
            T::expit_slice(&mut zr[3 * h..]);
            let rows = bi * h..(bi + 1) * h;
            let (cp, cn, tcr, hn) = (
                &c_prev[rows.clone()],
                &mut c_next[rows.clone()],
                &mut tc[rows.clone()],
                &mut h_next[rows],
            );
            for k in 0..h {
                cn[k] = zr[h + k] * cp[k] + zr[k] * zr[2 * h + k];
            }
            tcr.copy_from_slice(cn);
            T::tanh_slice(tcr);
            for k in 0..h {
                hn[k] = zr[3 * h + k] * tcr[k];
            }
        }
    }
    DirectionCache {
        gates,
        cells,
        hidden,
        tanh_cells,
        reverse,
    }
}

/// Backpropagation through time for one direction. Only the recurrent
/// product runs per step; weight gradients and the input gradient are
/// accumulated afterwards with one product each over all steps.
fn backprop_direction<T: Real>(
    w: &LstmWeights<T>,
    x: ArrayView3<'_, T>,
    cache: &DirectionCache<T>,
    dh_out: ArrayView3<'_, T>,
    dx: &mut Array3<T>,
) -> [Vec<T>; 3] {
    let (b, tl, d) = x.dim();
    let h = w.hidden();
    let g4 = 4 * h;
    let mut dz_all = Array3::<T>::zeros((tl, b, g4));
    let mut dh_next = Array2::<T>::zeros((b, h));
    let mut dc_next = Array2::<T>::zeros((b, h));

    for step in (0..tl).rev() {
        let t = if cache.reverse { tl - 1 - step } else { step };
        {
            let gates = cache.gates.index_axis(Axis(0), step);
            let gates = gates.as_slice().expect("contiguous gates");
            let tc = cache.tanh_cells.index_axis(Axis(0), step);
            let tc = tc.as_slice().expect("contiguous");
            let c_prev = cache.cells.index_axis(Axis(0), step);
            let c_prev = c_prev.as_slice().expect("contiguous");
            let dho = dh_out.slice(s![.., t, ..]);
            let mut dz = dz_all.index_axis_mut(Axis(0), step);
            let dzs = dz.as_slice_mut().expect("contiguous");
            let dhn = dh_next.as_slice().expect("contiguous");
            let dcn = dc_next.as_slice_mut().expect("contiguous");
            for bi in 0..b {
                let gr = &gates[bi * g4..(bi + 1) * g4];
                let zr = &mut dzs[bi * g4..(bi + 1) * g4];
                for k in 0..h {
                    let idx = bi * h + k;
                    let (i, f, g, o) = (gr[k], gr[h + k], gr[2 * h + k], gr[3 * h + k]);
                    let dh = dho[[bi, k]] + dhn[idx];
                    let tcv = tc[idx];
                    let d_o = dh * tcv;
                    let dc = dcn[idx] + dh * o * (T::one() - tcv * tcv);
                    let di = dc * g;
                    let dg = dc * i;
                    let df = dc * c_prev[idx];
                    dcn[idx] = dc * f;
                    zr[k] = di * i * (T::one() - i);
                    zr[h + k] = df * f * (T::one() - f);
                    zr[2 * h + k] = dg * (T::one() - g * g);
                    zr[3 * h + k] = d_o * o * (T::one() - o);
                }
            }
        }
        general_mat_mul(
            T::one(),
            &dz_all.index_axis(Axis(0), step),
            &w.w_h,
            T::zero(),
            &mut dh_next,
        );
    }

    let dz = flat(&dz_all);
    let xs = step_major(x, cache.reverse);
    let dwx = dz.t().dot(&flat(&xs));
    let h_prev = cache.hidden.slice(s![..tl, .., ..]);
    let h_prev = h_prev.into_shape_with_order((tl * b, h)).expect("contiguous hidden");
    let dwh = dz.t().dot(&h_prev);
    let db = dz.sum_axis(Axis(0));
    let dxs = dz
        .dot(&w.w_x)
        .into_shape_with_order((tl, b, d))
        .expect("input gradient shape");
    for step in 0..tl {
        let t = if cache.reverse { tl - 1 - step } else { step };
        let mut dst = dx.slice_mut(s![.., t, ..]);
        dst += &dxs.index_axis(Axis(0), step);
    }
    [
        dwx.into_raw_vec_and_offset().0,
        dwh.into_raw_vec_and_offset().0,
        db.into_raw_vec_and_offset().0,
    ]
}
