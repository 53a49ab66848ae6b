//! Force-noise budget for a thermal Casimir measurement.

use torsion_noise::planner::{feasibility_report, CasimirModel, MeasurementPlan};

fn main() -> torsion_noise::Result<()> {
    let plan = MeasurementPlan::thermal_casimir_preset();
    print!("{}", feasibility_report(&plan)?.to_text());

    println!();
    for hours in [1.0, 10.0, 100.0] {
        let plan = MeasurementPlan {
            averaging_time: hours * 3600.0,
            casimir_model: CasimirModel::DielectricHalved,
            ..MeasurementPlan::thermal_casimir_preset()
        };
        let r = feasibility_report(&plan)?;
        println!(
            "halved force, {hours:>5} h: margin {:.3}, achievable {}",
            r.margin, r.achievable
        );
    }
    Ok(())
}
