//! The Hall nonlinearity against the brute-force convolution oracle,
//! and its vanishing on Beltrami fields.

use emhd::nonlinear::{
    convolution_oracle, p_nonlinear, q_shifted, q_shifted_direct, CurlStencil, NonlinearForm,
    TransportStencil,
};
use emhd::spectral::{beltrami_z, gevrey_mult, random_divfree_field, single_shell_beltrami};
use emhd::WaveLattice;

fn main() -> emhd::Result<()> {
    let b = random_divfree_field(3, 6, 2.0, 1.0);
    for (form, name) in [(NonlinearForm::Curl, "curl"), (NonlinearForm::Transport, "transport")] {
        let fast = p_nonlinear(&b, form);
        let slow = match form {
            NonlinearForm::Curl => convolution_oracle(&b, &b, &CurlStencil)?,
            NonlinearForm::Transport => convolution_oracle(&b, &b, &TransportStencil)?,
        };
        println!("{name:9} form vs oracle: {:.3e}", fast.relative_diff(&slow));
    }

    let lattice = WaveLattice::unit(4)?;
    let z = beltrami_z(lattice);
    println!("beltrami_z:    |P(B)| = {:.3e}", p_nonlinear(&z, NonlinearForm::Curl).l2_norm());
    for shell in [1, 2, 3, 5] {
        let s = single_shell_beltrami(shell as u64, lattice, shell, 1.0)?;
        println!("shell |k|²={shell}:  |P(B)| = {:.3e}", p_nonlinear(&s, NonlinearForm::Curl).l2_norm());
    }

    // Q(U; θ) = Γ P(Γ⁻¹ U), Γ = e^{-θΛ}
    let theta = 0.1;
    let oracle = gevrey_mult(
        &p_nonlinear(&gevrey_mult(&b, theta, 1.0)?, NonlinearForm::Curl),
        -theta,
        1.0,
    )?;
    println!("q_shifted        vs conjugation: {:.3e}", q_shifted(&b, theta, 1.0)?.relative_diff(&oracle));
    println!("q_shifted_direct vs conjugation: {:.3e}", q_shifted_direct(&b, theta, 1.0)?.relative_diff(&oracle));
    Ok(())
}
