// Visible page content plus the load sentinel. Deleting any call here
// changes the screenshot or drops the sentinel.
function renderFrame() {
  for (let y = 20; y < 40; y++) { paint(30, y, 40, 90, 200); paint(31, y, 40, 90, 200); }
  return 0;
}
function renderTitle() {
  writeText("title", "redundant benchmark");
  return 0;
}
function finishLoad() {
  markLoaded();
  return 0;
}
renderFrame();
renderTitle();
log("boot");
finishLoad();
