//! Published error tables at T = 1, L = 4, 8, ..., 1024, rows H = 0.1..0.9.
#![allow(dead_code)]

/// `ε` from the exact truncated matrix.
pub const EPSILON: [(&str, [&str; 9]); 9] = [
    (
        "0.1",
        [
            "0.384241", "0.322871", "0.271951", "0.229895", "0.195015", "0.165934", "0.141569", "0.121067", "0.103751",
        ],
    ),
    (
        "0.2",
        [
            "0.186574", "0.136214", "0.100394", "0.074562", "0.055684", "0.041750", "0.031391", "0.023650", "0.017844",
        ],
    ),
    (
        "0.3",
        [
            "0.103451", "0.065528", "0.042250", "0.027513", "0.018016", "0.011834", "0.007788", "0.005130", "0.003381",
        ],
    ),
    (
        "0.4",
        [
            "0.060670", "0.033037", "0.018487", "0.010481", "0.005981", "0.003424", "0.001963", "0.001127", "0.000647",
        ],
    ),
    (
        "0.5",
        [
            "0.035714", "0.016667", "0.008065", "0.003968", "0.001969", "0.000980", "0.000489", "0.000244", "0.000122",
        ],
    ),
    (
        "0.6",
        [
            "0.020455", "0.008205", "0.003434", "0.001466", "0.000632", "0.000273", "0.000119", "0.000052", "0.000022",
        ],
    ),
    (
        "0.7",
        [
            "0.013216", "0.004937", "0.001924", "0.000763", "0.000305", "0.000123", "0.000050", "0.000020", "0.000008",
        ],
    ),
    (
        "0.8",
        [
            "0.021488", "0.011508", "0.006394", "0.003602", "0.002043", "0.001164", "0.000666", "0.000381", "0.000219",
        ],
    ),
    (
        "0.9",
        [
            "0.081197", "0.061740", "0.046942", "0.035625", "0.027012", "0.020475", "0.015518", "0.011760", "0.008913",
        ],
    ),
];

/// `ε*` from the H-split product form.
pub const EPSILON_STAR: [(&str, [&str; 9]); 9] = [
    (
        "0.1",
        [
            "0.385941", "0.324399", "0.273198", "0.230844", "0.195706", "0.166421", "0.141905", "0.121296", "0.103905",
        ],
    ),
    (
        "0.2",
        [
            "0.186654", "0.136295", "0.100453", "0.074599", "0.055705", "0.041761", "0.031396", "0.023653", "0.017846",
        ],
    ),
    (
        "0.3",
        [
            "0.103540", "0.065560", "0.042260", "0.027516", "0.018017", "0.011835", "0.007788", "0.005130", "0.003381",
        ],
    ),
    (
        "0.4",
        [
            "0.060718", "0.033052", "0.018491", "0.010483", "0.005981", "0.003424", "0.001963", "0.001127", "0.000647",
        ],
    ),
    (
        "0.5",
        [
            "0.035714", "0.016667", "0.008065", "0.003968", "0.001969", "0.000980", "0.000489", "0.000244", "0.000122",
        ],
    ),
    (
        "0.6",
        [
            "0.020484", "0.008212", "0.003436", "0.001466", "0.000632", "0.000273", "0.000119", "0.000052", "0.000022",
        ],
    ),
    (
        "0.7",
        [
            "0.013274", "0.004949", "0.001927", "0.000764", "0.000305", "0.000123", "0.000050", "0.000020", "0.000008",
        ],
    ),
    (
        "0.8",
        [
            "0.021554", "0.011519", "0.006396", "0.003602", "0.002043", "0.001164", "0.000666", "0.000381", "0.000219",
        ],
    ),
    (
        "0.9",
        [
            "0.081270", "0.061755", "0.046945", "0.035625", "0.027012", "0.020475", "0.015518", "0.011760", "0.008913",
        ],
    ),
];

/// `ε*` with form A above one half and form B below.
pub const EPSILON_STAR_CROSSED: [(&str, [&str; 9]); 9] = [
    (
        "0.1",
        [
            "0.387505", "0.324598", "0.272852", "0.230361", "0.195257", "0.166061", "0.141638", "0.121105", "0.103773",
        ],
    ),
    (
        "0.2",
        [
            "0.188157", "0.136902", "0.100683", "0.074680", "0.055731", "0.041768", "0.031398", "0.023653", "0.017845",
        ],
    ),
    (
        "0.3",
        [
            "0.103962", "0.065718", "0.042318", "0.027537", "0.018024", "0.011837", "0.007788", "0.005130", "0.003381",
        ],
    ),
    (
        "0.4",
        [
            "0.060756", "0.033064", "0.018495", "0.010484", "0.005982", "0.003424", "0.001963", "0.001127", "0.000647",
        ],
    ),
    (
        "0.5",
        [
            "0.035714", "0.016667", "0.008065", "0.003968", "0.001969", "0.000980", "0.000489", "0.000244", "0.000122",
        ],
    ),
    (
        "0.6",
        [
            "0.020497", "0.008216", "0.003437", "0.001466", "0.000632", "0.000273", "0.000119", "0.000052", "0.000022",
        ],
    ),
    (
        "0.7",
        [
            "0.013329", "0.004961", "0.001930", "0.000764", "0.000305", "0.000123", "0.000050", "0.000020", "0.000008",
        ],
    ),
    (
        "0.8",
        [
            "0.021687", "0.011556", "0.006409", "0.003607", "0.002045", "0.001165", "0.000666", "0.000381", "0.000219",
        ],
    ),
    (
        "0.9",
        [
            "0.081701", "0.061995", "0.047097", "0.035724", "0.027077", "0.020517", "0.015546", "0.011779", "0.008925",
        ],
    ),
];

pub const ORDERS: [usize; 9] = [4, 8, 16, 32, 64, 128, 256, 512, 1024];
