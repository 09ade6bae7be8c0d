//! Built-in device profiles, loaded from the embedded `data/profiles.toml`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::model::{DeviceProfile, Role};

/// The five Android devices, fastest first.
pub const ANDROID_DEVICES: [&str; 5] = ["pixel4", "mi9t", "tab_s5e", "s7e", "nexus9"];

pub const CLOUDLET: &str = "cloudlet";

/// One row of the profile table, in file units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub name: String,
    pub model: String,
    pub exec_time_s: f64,
    pub p_compute_w: f64,
    pub p_idle_w: f64,
    pub p_upload_w: f64,
    pub p_download_w: f64,
    pub uplink_mbps: f64,
    pub downlink_mbps: f64,
    pub jitter: f64,
    pub role: Role,
    /// Fields fitted to published orderings and ratios rather than measured.
    #[serde(default)]
    pub calibrated: Vec<String>,
}

impl ProfileEntry {
    pub fn to_profile(&self) -> DeviceProfile {
        DeviceProfile {
            name: self.name.clone(),
            p_idle: self.p_idle_w,
            p_compute: self.p_compute_w,
            p_upload: self.p_upload_w,
            p_download: self.p_download_w,
            exec_time_mean: self.exec_time_s,
            exec_time_jitter: self.jitter,
            uplink_bw: self.uplink_mbps * 1e6,
            downlink_bw: self.downlink_mbps * 1e6,
            role: self.role,
        }
    }

    pub fn is_calibrated(&self, field: &str) -> bool {
        self.calibrated.iter().any(|f| f == field)
    }
}

#[derive(Deserialize)]
struct ProfileFile {
    device: Vec<ProfileEntry>,
}

const PROFILE_DATA: &str = include_str!("../../data/profiles.toml");

/// Every built-in profile entry, in file order.
pub fn builtin_entries() -> &'static [ProfileEntry] {
    static ENTRIES: OnceLock<Vec<ProfileEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        toml::from_str::<ProfileFile>(PROFILE_DATA)
            .expect("embedded profile table is valid")
            .device
    })
}

pub fn builtin_profiles() -> Vec<DeviceProfile> {
    builtin_entries().iter().map(ProfileEntry::to_profile).collect()
}

pub fn builtin_profile(name: &str) -> Option<DeviceProfile> {
    builtin_entries()
        .iter()
        .find(|e| e.name == name)
        .map(ProfileEntry::to_profile)
}
