//! Per-job compute energy of every built-in profile and the cloudlet's
//! speed and energy ratios against each Android device.

use offload_sim::config::{builtin_profile, ANDROID_DEVICES, CLOUDLET};
use offload_sim::model::joules_to_mwh;

fn main() {
    let cloudlet = builtin_profile(CLOUDLET).expect("built-in cloudlet");
    println!("{:<10} {:>6} {:>10} {:>12} {:>13}", "device", "TE[s]", "E[mWh]", "cloudlet x", "cloudlet E x");
    for name in ANDROID_DEVICES {
        let d = builtin_profile(name).expect("built-in device");
        println!(
            "{:<10} {:>6.2} {:>10.3} {:>12.2} {:>13.2}",
            name,
            d.exec_time_mean,
            joules_to_mwh(d.compute_energy_per_job()),
            d.exec_time_mean / cloudlet.exec_time_mean,
            cloudlet.compute_energy_per_job() / d.compute_energy_per_job(),
        );
    }
    println!(
        "{:<10} {:>6.2} {:>10.3}",
        CLOUDLET,
        cloudlet.exec_time_mean,
        joules_to_mwh(cloudlet.compute_energy_per_job())
    );
}
