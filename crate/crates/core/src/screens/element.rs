use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCREEN_WIDTH: i64 = 1080;
pub const SCREEN_HEIGHT: i64 = 2400;
/// Height of one layout row.
pub const ROW_HEIGHT: i64 = 120;
/// Rows visible at once.
pub const VIEWPORT_ROWS: usize = 16;
/// Rows moved by one vertical scroll.
pub const SCROLL_STEP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementClass {
    TextView,
    EditText,
    Button,
    Checkbox,
    ImageButton,
    ListItem,
}

impl ElementClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementClass::TextView => "text_view",
            ElementClass::EditText => "edit_text",
            ElementClass::Button => "button",
            ElementClass::Checkbox => "checkbox",
            ElementClass::ImageButton => "image_button",
            ElementClass::ListItem => "list_item",
        }
    }

    /// Android widget class this element stands in for.
    pub fn android_name(self) -> &'static str {
        match self {
            ElementClass::TextView => "android.widget.TextView",
            ElementClass::EditText => "android.widget.EditText",
            ElementClass::Button => "android.widget.Button",
            ElementClass::Checkbox => "android.widget.CheckBox",
            ElementClass::ImageButton => "android.widget.ImageButton",
            ElementClass::ListItem => "android.widget.LinearLayout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: i64,
    pub y_min: i64,
    pub x_max: i64,
    pub y_max: i64,
}

impl BBox {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        (self.x_min..self.x_max).contains(&x) && (self.y_min..self.y_max).contains(&y)
    }

    pub fn center(&self) -> (i64, i64) {
        ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UIElement {
    pub index: usize,
    pub text: Option<String>,
    pub content_description: Option<String>,
    pub class_name: ElementClass,
    pub bbox: BBox,
    pub is_clickable: bool,
    pub is_scrollable: bool,
    pub is_focused: bool,
    pub is_checked: bool,
}

impl UIElement {
    /// Text if present, else the content description.
    pub fn label(&self) -> Option<&str> {
        self.text.as_deref().or(self.content_description.as_deref())
    }

    pub fn is_interactable(&self) -> bool {
        self.is_clickable
            || self.is_scrollable
            || matches!(self.class_name, ElementClass::EditText | ElementClass::Checkbox)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub foreground_app: String,
    pub screen_id: String,
    pub elements: Vec<UIElement>,
    pub viewport_offset: usize,
}

impl Observation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("observation serializes")
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn find_text(&self, text: &str) -> Option<&UIElement> {
        self.elements.iter().find(|e| e.text.as_deref() == Some(text))
    }

    pub fn find_description(&self, desc: &str) -> Option<&UIElement> {
        self.elements
            .iter()
            .find(|e| e.content_description.as_deref() == Some(desc))
    }

    pub fn focused(&self) -> Option<&UIElement> {
        self.elements.iter().find(|e| e.is_focused)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionResult {
    pub applied: bool,
    pub note: String,
    pub terminal: bool,
}

impl TransitionResult {
    pub fn applied(note: impl Into<String>) -> Self {
        TransitionResult {
            applied: true,
            note: note.into(),
            terminal: false,
        }
    }

    pub fn rejected(note: impl Into<String>) -> Self {
        TransitionResult {
            applied: false,
            note: note.into(),
            terminal: false,
        }
    }
}
