class ImagePatch:
    """A crop of an image. Coordinates are pixels measured from the bottom-left corner."""

    def __init__(self, image, left=None, lower=None, right=None, upper=None):
        """Defaults cover the whole image. Exposes left, right, upper, lower,
        width, height, horizontal_center and vertical_center."""

    def find(self, object_name: str) -> list["ImagePatch"]:
        """Patches of every object called object_name, sorted left to right."""

    def exists(self, object_name: str) -> bool:
        """Whether find(object_name) is non-empty."""

    def verify_property(self, object_name: str, property: str) -> bool:
        """Whether the named object has the property."""

    def simple_query(self, question: str) -> str:
        """Short answer to a question about the patch."""

    def best_text_match(self, option_list: list[str]) -> str:
        """The option that best describes the patch."""

    def crop(self, left: int, lower: int, right: int, upper: int) -> "ImagePatch":
        """Sub-patch clipped to this patch."""

    def compute_depth(self) -> float:
        """Mean depth of the objects in the patch; smaller is closer."""


def best_image_match(list_patches: list[ImagePatch], content: list[str], return_index: bool = False):
    """The patch (or its index) matching the most content terms."""


def bool_to_yesno(bool_answer: bool) -> str:
    """'yes' or 'no'."""


def distance(patch_a: ImagePatch, patch_b: ImagePatch) -> float:
    """Distance between patch centers; 0.0 when they overlap."""


# Example:
# Is there a red car?
def execute_command(image) -> str:
    image_patch = ImagePatch(image)
    car_patches = image_patch.find('car')
    for car_patch in car_patches:
        if car_patch.verify_property('car', 'red'):
            return 'yes'
    return 'no'
