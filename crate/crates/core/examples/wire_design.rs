//! Intrinsic damping and stiffness of tungsten fibers.

use torsion_noise::planner::{crossover_length, damping_table, wire_properties, WireSpec};

fn main() -> torsion_noise::Result<()> {
    for (radius_um, length_cm) in [(25.0, 40.0), (50.0, 40.0), (50.0, 80.0)] {
        let wire = WireSpec::tungsten(radius_um * 1e-4, length_cm);
        let w = wire_properties(&wire)?;
        println!(
            "r = {radius_um} µm, ℓ = {length_cm} cm: γ_W = {:.3e} dyne·cm·s, α = {:.4e} dyne·cm/rad",
            w.damping, w.stiffness
        );
        println!("  length where γ_W reaches 0.2: {:.3e} cm", crossover_length(&wire, 0.2)?);
    }
    for row in damping_table() {
        println!(
            "{}: γ = {}, γ_W = {}, γ_W / γ = {:.1e}",
            row.name,
            row.system_damping,
            row.wire_damping,
            row.length_shrink_factor()
        );
    }
    Ok(())
}
