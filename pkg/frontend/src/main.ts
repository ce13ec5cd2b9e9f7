import { ReviewApi } from "./api.js";
import { mountApp } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8765";
const rater = params.get("rater") ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

if (rater) {
  mountApp(root, new ReviewApi(apiBase), rater);
} else {
  const form = document.createElement("form");
  form.className = "rater-login";
  const input = document.createElement("input");
  input.placeholder = "your rater id";
  input.name = "rater";
  const go = document.createElement("button");
  go.textContent = "start rating";
  form.append(input, go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim()) {
      mountApp(root, new ReviewApi(apiBase), input.value.trim());
    }
  });
  root.appendChild(form);
}
